#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimgraph/errors.hpp"

namespace claimgraph {

/// Dense, fixed-dimension sentence embedding. Values are stored as 32-bit
/// floats; all arithmetic on them accumulates in double.
class EmbeddingVector {
public:
    /// Throws DimensionError when empty, InvalidArgumentError on NaN/inf.
    explicit EmbeddingVector(std::vector<float> values);

    static EmbeddingVector zeros(std::size_t dim);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    float operator[](std::size_t i) const { return values_[i]; }

    bool is_zero() const noexcept;
    double norm() const noexcept;
    /// Unit-length copy. Throws DegenerateVectorError for the zero vector.
    EmbeddingVector normalized() const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<float> values_;
};

enum class Metric { euclidean, cosine };

std::string_view to_string(Metric m) noexcept;
/// Accepts "euclidean" and "cosine" / "cosine-distance".
Metric parse_metric(std::string_view name);

namespace kernel {

// Unchecked inner loops shared by distance() and the engine's flat scan.
// Callers guarantee equal lengths.

// Thirty-two independent partial sums (four vector registers of doubles) let
// the compiler vectorise the reduction and overlap FMA latency without
// -ffast-math; the summation order is fixed, so results are reproducible
// across calls.

inline constexpr std::size_t kLanes = 32;

inline double reduce_lanes(const double* s, double tail) noexcept {
    double r[8];
    for (int l = 0; l < 8; ++l) r[l] = (s[l] + s[l + 8]) + (s[l + 16] + s[l + 24]);
    return ((r[0] + r[1]) + (r[2] + r[3])) + ((r[4] + r[5]) + (r[6] + r[7])) + tail;
}

inline double squared_euclidean(const float* a, const float* b, std::size_t n) noexcept {
    double s[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            const double d = static_cast<double>(a[i + l]) - static_cast<double>(b[i + l]);
            s[l] += d * d;
        }
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        tail += d * d;
    }
    return reduce_lanes(s, tail);
}

inline double dot(const float* a, const float* b, std::size_t n) noexcept {
    double s[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) s[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return reduce_lanes(s, tail);
}

}  // namespace kernel

/// Euclidean distance, or 1 - cos(a, b) for Metric::cosine.
/// Throws DimensionError on length mismatch and DegenerateVectorError when a
/// cosine operand is all-zero.
double distance(std::span<const float> a, std::span<const float> b, Metric m);

inline double distance(const EmbeddingVector& a, const EmbeddingVector& b, Metric m) {
    return distance(a.values(), b.values(), m);
}

struct Sentence {
    std::string text;
    std::string article_id;
    std::size_t char_start = 0;
    std::size_t char_end = 0;

    bool operator==(const Sentence&) const = default;
};

enum class Category { checkable, prediction, personal_experience, not_claim };

std::string_view to_string(Category c) noexcept;
Category parse_category(std::string_view name);

enum class Verdict { true_, false_, misleading, unverifiable };

std::string_view to_string(Verdict v) noexcept;
Verdict parse_verdict(std::string_view name);

struct Factcheck {
    Verdict verdict = Verdict::unverifiable;
    std::string note;
    std::string checked_at;  // ISO-8601 UTC
    std::string source_claim_id;

    bool operator==(const Factcheck&) const = default;
};

struct Claim {
    std::string id;
    Sentence sentence;
    EmbeddingVector embedding;
    double detection_score = 1.0;
    Category category = Category::checkable;
    std::optional<Factcheck> factcheck;

    bool operator==(const Claim&) const = default;
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string now_iso8601();

}  // namespace claimgraph
