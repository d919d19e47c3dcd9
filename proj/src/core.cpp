#include "claimgraph/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>

namespace claimgraph {

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
    if (values_.empty()) throw DimensionError("embedding vector must have dim >= 1");
    for (float v : values_) {
        if (!std::isfinite(v)) throw InvalidArgumentError("embedding vector contains a non-finite value");
    }
}

EmbeddingVector EmbeddingVector::zeros(std::size_t dim) {
    return EmbeddingVector(std::vector<float>(dim, 0.0f));
}

bool EmbeddingVector::is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](float v) { return v == 0.0f; });
}

double EmbeddingVector::norm() const noexcept {
    return std::sqrt(kernel::dot(values_.data(), values_.data(), values_.size()));
}

EmbeddingVector EmbeddingVector::normalized() const {
    const double n = norm();
    if (n == 0.0) throw DegenerateVectorError("cannot normalize the zero vector");
    std::vector<float> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = static_cast<float>(values_[i] / n);
    return EmbeddingVector(std::move(out));
}

std::string_view to_string(Metric m) noexcept {
    return m == Metric::euclidean ? "euclidean" : "cosine";
}

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cosine" || name == "cosine-distance") return Metric::cosine;
    throw InvalidArgumentError("unknown metric: " + std::string(name));
}

double distance(std::span<const float> a, std::span<const float> b, Metric m) {
    if (a.size() != b.size()) {
        throw DimensionError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    if (m == Metric::euclidean) return std::sqrt(kernel::squared_euclidean(a.data(), b.data(), a.size()));

    const double na = kernel::dot(a.data(), a.data(), a.size());
    const double nb = kernel::dot(b.data(), b.data(), b.size());
    if (na == 0.0 || nb == 0.0) throw DegenerateVectorError("cosine distance undefined for a zero vector");
    const double cos = kernel::dot(a.data(), b.data(), a.size()) / std::sqrt(na * nb);
    return std::clamp(1.0 - cos, 0.0, 2.0);
}

std::string_view to_string(Category c) noexcept {
    switch (c) {
        case Category::checkable: return "checkable";
        case Category::prediction: return "prediction";
        case Category::personal_experience: return "personal_experience";
        case Category::not_claim: return "not_claim";
    }
    return "not_claim";
}

Category parse_category(std::string_view name) {
    if (name == "checkable") return Category::checkable;
    if (name == "prediction") return Category::prediction;
    if (name == "personal_experience") return Category::personal_experience;
    if (name == "not_claim") return Category::not_claim;
    throw ParseError("unknown category label: " + std::string(name));
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::true_: return "true";
        case Verdict::false_: return "false";
        case Verdict::misleading: return "misleading";
        case Verdict::unverifiable: return "unverifiable";
    }
    return "unverifiable";
}

Verdict parse_verdict(std::string_view name) {
    if (name == "true") return Verdict::true_;
    if (name == "false") return Verdict::false_;
    if (name == "misleading") return Verdict::misleading;
    if (name == "unverifiable") return Verdict::unverifiable;
    throw InvalidArgumentError("unknown verdict: " + std::string(name));
}

std::string now_iso8601() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

}  // namespace claimgraph
