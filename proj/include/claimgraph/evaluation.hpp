#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimgraph/core.hpp"
#include "claimgraph/detection.hpp"
#include "claimgraph/embeddings.hpp"
#include "claimgraph/graph.hpp"

namespace claimgraph {

// ---- duplicate-pair analysis ------------------------------------------------

struct LabeledPair {
    std::string text_a;
    std::string text_b;
    bool is_duplicate = false;
};

/// Column names to read from a pair CSV. The defaults match the native
/// format; the public Quora export maps to {"question1", "question2",
/// "is_duplicate"}.
struct PairColumns {
    std::string text_a = "text_a";
    std::string text_b = "text_b";
    std::string label = "is_duplicate";
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

std::vector<LabeledPair> read_pair_csv(std::istream& in, const PairColumns& cols = {});
std::vector<LabeledPair> read_pair_csv(const std::filesystem::path& path, const PairColumns& cols = {});

struct LabeledDistance {
    double distance = 0.0;
    bool is_duplicate = false;
};

/// Embeds every distinct text once and measures each pair.
std::vector<LabeledDistance> pair_distances(std::span<const LabeledPair> pairs, const Embedder& embedder,
                                            Metric metric);

struct Histogram {
    std::vector<double> edges;  // bins + 1 boundaries
    std::vector<std::size_t> duplicate;
    std::vector<std::size_t> non_duplicate;
};

/// Equal-width bins over [min, max] of all observed distances; the maximum
/// falls in the last bin and a zero-width range puts everything in bin 0.
/// Throws EmptyDatasetError for no pairs and InvalidArgumentError for bins < 2.
Histogram distance_histogram(std::span<const LabeledDistance> data, std::size_t bins);
Histogram distance_histogram(std::span<const LabeledPair> pairs, const Embedder& embedder, Metric metric,
                             std::size_t bins);

struct SweepPoint {
    double threshold = 0.0;
    PrfScores scores;
};

struct SweepResult {
    double best_threshold = 0.0;
    double best_f1 = 0.0;
    std::vector<SweepPoint> curve;  // ascending threshold
};

/// Pairs with distance < threshold are called duplicates. Candidates are the
/// smallest distance (nothing predicted), the midpoints between consecutive
/// distinct distances, and the next double above the largest distance
/// (everything predicted). The F1-maximising candidate wins, smallest on ties.
/// Throws DegenerateLabelsError unless both classes are present.
SweepResult threshold_sweep(std::span<const LabeledDistance> data);
SweepResult threshold_sweep(std::span<const LabeledPair> pairs, const Embedder& embedder, Metric metric);

// ---- cluster quality ---------------------------------------------------------

struct QualityParams {
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;

    /// A = B = 1, C = 1 / total_claims: the second factor becomes the
    /// clustered fraction.
    static QualityParams normalized_for(std::size_t total_claims);
};

struct ClusterQualityScore {
    double score = 0.0;
    double p_os = 0.0;  // clustered claims in single-story clusters
    double p_cc = 0.0;  // clustered claims whose story is a modal story of their cluster
    std::size_t n_c = 0;
};

/// score = (A * p_os + B * p_cc) * (C * n_c). cluster_of uses
/// DbscanResult::noise for unclustered claims. Throws MissingLabelError when
/// a clustered claim has no story label.
ClusterQualityScore cluster_quality(std::span<const int> cluster_of,
                                    std::span<const std::optional<std::string>> story_of,
                                    const QualityParams& params);

struct StoryClaim {
    std::string text;
    std::string story_id;
};

/// {"text": ..., "story_id": ...} JSON Lines.
std::vector<StoryClaim> read_story_corpus(const std::filesystem::path& path);

/// "start:stop:step" (inclusive stop) or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec);

struct GridPoint {
    double epsilon = 0.0;
    ClusterQualityScore quality;
    std::size_t cluster_count = 0;
};

struct ClusteringReportRow {
    std::string embedding_name;
    double time_taken_s = 0.0;  // embedding + clustering
    double embedding_time_s = 0.0;
    double clustering_time_s = 0.0;
    std::size_t claims_clustered = 0;
    std::size_t cluster_count = 0;
    double pct_majority = 0.0;   // 100 * p_cc
    double pct_one_story = 0.0;  // 100 * p_os
};

struct GridSearchResult {
    double best_epsilon = 0.0;
    std::vector<GridPoint> curve;
    ClusteringReportRow report;
    DbscanResult best_clustering;
};

/// DBSCAN at every epsilon of the grid, scored by cluster_quality; the best
/// score wins, smallest epsilon on ties. Params default to
/// QualityParams::normalized_for(n). Grid points run on worker threads; the
/// result does not depend on scheduling.
GridSearchResult grid_search_epsilon(std::span<const EmbeddingVector> vectors, std::span<const std::string> stories,
                                     std::span<const double> grid, std::size_t min_size,
                                     std::optional<QualityParams> params, Metric metric,
                                     std::string embedding_name = "vectors");

GridSearchResult grid_search_epsilon(std::span<const StoryClaim> claims, const Embedder& embedder,
                                     std::span<const double> grid, std::size_t min_size,
                                     std::optional<QualityParams> params, std::optional<Metric> metric = std::nullopt);

void write_report_csv(std::ostream& out, std::span<const ClusteringReportRow> rows);

}  // namespace claimgraph
