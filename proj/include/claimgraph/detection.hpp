#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimgraph/core.hpp"
#include "claimgraph/embeddings.hpp"

namespace claimgraph {

/// Splits article text into sentences. A boundary is a run of . ! or ?
/// (optionally followed by closing quotes/brackets), then whitespace, then an
/// uppercase letter (optionally behind an opening quote). A single period
/// after a known abbreviation, a lone capital initial, or a dotted acronym
/// such as "U.S." is not a boundary. Offsets are byte offsets into the input
/// and each sentence is trimmed of surrounding whitespace.
std::vector<Sentence> split_sentences(std::string_view article_text, std::string_view article_id = {});

/// Abbreviations that do not end a sentence, without their trailing period.
const std::vector<std::string>& default_abbreviations();

struct LabeledSentence {
    Sentence sentence;
    Category label = Category::not_claim;
};

/// Reads {"text": ..., "label": ...} JSON Lines.
std::vector<LabeledSentence> read_labeled_corpus(const std::filesystem::path& path);

struct LabeledVector {
    EmbeddingVector features;
    bool label = false;
};

struct ClaimClassifier {
    std::vector<double> weights;
    double bias = 0.0;
    double threshold = 0.5;
    double l2_lambda = 0.0;

    std::size_t dim() const noexcept { return weights.size(); }

    /// {"dim": N, "weights": [...], "bias": x, "threshold": t}
    std::string to_json() const;
    static ClaimClassifier from_json(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static ClaimClassifier load(const std::filesystem::path& path);
};

struct TrainOptions {
    double l2_lambda = 1e-4;
    double learning_rate = 1.0;
    int epochs = 300;
    std::uint64_t seed = 0;
};

struct TrainResult {
    ClaimClassifier classifier;
    /// Regularised loss before the first epoch and after each epoch.
    std::vector<double> loss_per_epoch;
};

/// Mean logistic loss plus (lambda / 2) * ||w||^2. The bias is not penalised.
double logistic_loss(std::span<const double> weights, double bias, std::span<const LabeledVector> data,
                     double l2_lambda);

struct LogisticGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

LogisticGradient logistic_gradient(std::span<const double> weights, double bias, std::span<const LabeledVector> data,
                                   double l2_lambda);

/// Full-batch proximal gradient descent on the L2-regularised logistic loss:
/// a gradient step on the data term followed by the closed-form shrink
/// w /= (1 + lr * lambda), which stays stable for any lambda. Weights start
/// from a small seeded Gaussian so runs are reproducible.
/// Throws DegenerateLabelsError when only one label is present.
TrainResult fit_logistic(std::span<const LabeledVector> data, const TrainOptions& opts);

inline ClaimClassifier train_classifier(std::span<const LabeledVector> data, const TrainOptions& opts) {
    return fit_logistic(data, opts).classifier;
}

struct Prediction {
    double score = 0.0;
    bool is_claim = false;
};

double sigmoid(double z) noexcept;

/// score = sigmoid(w . v + b); is_claim = score >= threshold.
Prediction predict(const ClaimClassifier& classifier, const EmbeddingVector& v);

struct CategoryRules {
    /// Single words or space-separated phrases matched on lowercased words.
    std::vector<std::string> prediction_markers{"will", "won't", "won’t", "shall", "going to", "is expected to",
                                                "are expected to"};
    std::vector<std::string> experience_subjects{"i", "we"};
    std::vector<std::string> experience_verbs{"saw",     "seen",    "felt",      "feel",     "believe",
                                              "believed", "think",  "thought",   "witnessed", "experienced",
                                              "remember", "heard"};
    /// An experience verb must follow a subject within this many words.
    std::size_t experience_window = 3;
};

/// prediction, personal_experience, or checkable.
Category categorize(std::string_view text, const CategoryRules& rules = {});

/// Re-categorises every claim with `rules` and drops predictions and
/// personal-experience claims.
std::vector<Claim> filter_categories(std::vector<Claim> claims, const CategoryRules& rules = {});

struct PrfScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Scores on the positive class; 0/0 ratios are reported as 0.
PrfScores prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) noexcept;

/// Throws AlignmentError on length mismatch or empty input.
PrfScores evaluate_prf(const std::vector<bool>& predicted, const std::vector<bool>& gold);

struct DetectedSentence {
    Sentence sentence;
    EmbeddingVector embedding;
    double score = 1.0;
    Category category = Category::checkable;
    bool is_claim = true;
};

/// Split -> embed -> classify -> categorise. Without a classifier every
/// sentence scores 1.0 and only the category rules apply.
class ClaimDetector {
public:
    ClaimDetector(std::shared_ptr<const Embedder> embedder, std::optional<ClaimClassifier> classifier,
                  CategoryRules rules = {});

    std::vector<DetectedSentence> detect(std::string_view article_id, std::string_view body) const;
    Prediction score(const EmbeddingVector& v) const;

    const Embedder& embedder() const noexcept { return *embedder_; }

private:
    std::shared_ptr<const Embedder> embedder_;
    std::optional<ClaimClassifier> classifier_;
    CategoryRules rules_;
};

}  // namespace claimgraph
