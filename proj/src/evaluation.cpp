#include "claimgraph/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

using json = nlohmann::json;

namespace claimgraph {

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    char c;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty()) throw ParseError("CSV: quote inside an unquoted field");
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (in.peek() == '\n') in.get(c);
                end_row();
                break;
            case '\n': end_row(); break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError("CSV: unterminated quoted field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

std::vector<LabeledPair> read_pair_csv(std::istream& in, const PairColumns& cols) {
    const auto rows = read_csv(in);
    if (rows.empty()) throw EmptyDatasetError("pair CSV is empty");
    const auto& header = rows.front();
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("pair CSV has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ia = column(cols.text_a), ib = column(cols.text_b), il = column(cols.label);
    std::vector<LabeledPair> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw ParseError("pair CSV row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                             " fields, header has " + std::to_string(header.size()));
        }
        const auto& label = row[il];
        if (label != "0" && label != "1") {
            throw ParseError("pair CSV row " + std::to_string(r + 1) + ": is_duplicate must be 0 or 1");
        }
        if (row[ia].empty() || row[ib].empty()) {
            throw ParseError("pair CSV row " + std::to_string(r + 1) + " has an empty text");
        }
        out.push_back({row[ia], row[ib], label == "1"});
    }
    return out;
}

std::vector<LabeledPair> read_pair_csv(const std::filesystem::path& path, const PairColumns& cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    return read_pair_csv(in, cols);
}

std::vector<LabeledDistance> pair_distances(std::span<const LabeledPair> pairs, const Embedder& embedder,
                                            Metric metric) {
    if (pairs.empty()) throw EmptyDatasetError("no labeled pairs");
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::string> texts;
    for (const auto& p : pairs) {
        for (const auto* t : {&p.text_a, &p.text_b}) {
            if (slot.try_emplace(*t, texts.size()).second) texts.push_back(*t);
        }
    }
    const auto vectors = embedder.embed(texts);
    std::vector<LabeledDistance> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.push_back({distance(vectors[slot.at(p.text_a)], vectors[slot.at(p.text_b)], metric), p.is_duplicate});
    }
    return out;
}

Histogram distance_histogram(std::span<const LabeledDistance> data, std::size_t bins) {
    if (data.empty()) throw EmptyDatasetError("no labeled pairs");
    if (bins < 2) throw InvalidArgumentError("histogram needs at least 2 bins");
    const auto [lo_it, hi_it] = std::minmax_element(
        data.begin(), data.end(), [](const auto& x, const auto& y) { return x.distance < y.distance; });
    const double lo = lo_it->distance, hi = hi_it->distance;
    const double width = (hi - lo) / static_cast<double>(bins);

    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;
    h.duplicate.assign(bins, 0);
    h.non_duplicate.assign(bins, 0);
    for (const auto& d : data) {
        std::size_t b = 0;
        if (width > 0.0) {
            b = static_cast<std::size_t>((d.distance - lo) / width);
            b = std::min(b, bins - 1);
        }
        ++(d.is_duplicate ? h.duplicate : h.non_duplicate)[b];
    }
    return h;
}

Histogram distance_histogram(std::span<const LabeledPair> pairs, const Embedder& embedder, Metric metric,
                             std::size_t bins) {
    if (bins < 2) throw InvalidArgumentError("histogram needs at least 2 bins");
    const auto data = pair_distances(pairs, embedder, metric);
    return distance_histogram(data, bins);
}

SweepResult threshold_sweep(std::span<const LabeledDistance> data) {
    if (data.empty()) throw EmptyDatasetError("no labeled pairs");
    std::vector<LabeledDistance> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.distance < y.distance; });
    const auto positives =
        static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(), [](const auto& d) { return d.is_duplicate; }));
    if (positives == 0 || positives == sorted.size()) {
        throw DegenerateLabelsError("threshold sweep needs both duplicate and non-duplicate pairs");
    }

    SweepResult result;
    auto record = [&](double threshold, std::size_t tp, std::size_t fp) {
        const PrfScores s = prf_from_counts(tp, fp, positives - tp);
        result.curve.push_back({threshold, s});
        if (result.curve.size() == 1 || s.f1 > result.best_f1) {
            result.best_f1 = s.f1;
            result.best_threshold = threshold;
        }
    };

    record(sorted.front().distance, 0, 0);
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double d = sorted[i].distance;
        while (i < sorted.size() && sorted[i].distance == d) {
            ++(sorted[i].is_duplicate ? tp : fp);
            ++i;
        }
        double threshold;
        if (i < sorted.size()) {
            const double next = sorted[i].distance;
            threshold = d + (next - d) / 2.0;
            if (!(threshold > d)) threshold = next;
        } else {
            threshold = std::nextafter(d, std::numeric_limits<double>::infinity());
        }
        record(threshold, tp, fp);
    }
    return result;
}

SweepResult threshold_sweep(std::span<const LabeledPair> pairs, const Embedder& embedder, Metric metric) {
    const auto data = pair_distances(pairs, embedder, metric);
    return threshold_sweep(data);
}

QualityParams QualityParams::normalized_for(std::size_t total_claims) {
    if (total_claims == 0) throw InvalidArgumentError("cannot normalise quality params for zero claims");
    return {1.0, 1.0, 1.0 / static_cast<double>(total_claims)};
}

ClusterQualityScore cluster_quality(std::span<const int> cluster_of,
                                    std::span<const std::optional<std::string>> story_of,
                                    const QualityParams& params) {
    if (cluster_of.size() != story_of.size()) throw AlignmentError("cluster and story label counts differ");
    if (!(params.a > 0.0 && params.b > 0.0 && params.c > 0.0)) {
        throw InvalidArgumentError("quality parameters A, B and C must be positive");
    }

    std::map<int, std::map<std::string, std::size_t>> stories_per_cluster;
    std::map<int, std::size_t> size_of;
    for (std::size_t i = 0; i < cluster_of.size(); ++i) {
        if (cluster_of[i] == DbscanResult::noise) continue;
        if (!story_of[i]) throw MissingLabelError("clustered claim " + std::to_string(i) + " has no story label");
        ++stories_per_cluster[cluster_of[i]][*story_of[i]];
        ++size_of[cluster_of[i]];
    }

    ClusterQualityScore q;
    std::size_t one_story = 0, majority = 0;
    for (const auto& [cluster, stories] : stories_per_cluster) {
        const std::size_t n = size_of[cluster];
        q.n_c += n;
        if (stories.size() == 1) one_story += n;
        std::size_t mode = 0;
        for (const auto& [story, count] : stories) mode = std::max(mode, count);
        for (const auto& [story, count] : stories) majority += count == mode ? count : 0;
    }
    if (q.n_c == 0) return q;
    q.p_os = static_cast<double>(one_story) / static_cast<double>(q.n_c);
    q.p_cc = static_cast<double>(majority) / static_cast<double>(q.n_c);
    q.score = (params.a * q.p_os + params.b * q.p_cc) * (params.c * static_cast<double>(q.n_c));
    return q;
}

std::vector<StoryClaim> read_story_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    std::vector<StoryClaim> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            out.push_back({j.at("text").get<std::string>(), j.at("story_id").get<std::string>()});
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

namespace {

double parse_double(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string_view::npos) {
        const auto p1 = spec.find(':');
        const auto p2 = spec.find(':', p1 + 1);
        if (p2 == std::string_view::npos) throw ParseError("grid must be start:stop:step");
        const double start = parse_double(spec.substr(0, p1));
        const double stop = parse_double(spec.substr(p1 + 1, p2 - p1 - 1));
        const double step = parse_double(spec.substr(p2 + 1));
        if (!(step > 0.0) || stop < start) throw ParseError("grid needs step > 0 and stop >= start");
        for (std::size_t i = 0;; ++i) {
            const double v = start + step * static_cast<double>(i);
            if (v > stop + step * 1e-9) break;
            out.push_back(v);
        }
    } else {
        std::size_t pos = 0;
        while (pos <= spec.size()) {
            const auto comma = spec.find(',', pos);
            const auto item = spec.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
            out.push_back(parse_double(item));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
    }
    if (out.empty()) throw ParseError("empty epsilon grid");
    return out;
}

GridSearchResult grid_search_epsilon(std::span<const EmbeddingVector> vectors, std::span<const std::string> stories,
                                     std::span<const double> grid, std::size_t min_size,
                                     std::optional<QualityParams> params, Metric metric, std::string embedding_name) {
    if (grid.empty()) throw InvalidArgumentError("epsilon grid is empty");
    if (vectors.size() != stories.size()) throw AlignmentError("vector and story counts differ");
    if (vectors.empty()) throw EmptyDatasetError("no claims to cluster");
    const QualityParams qp = params.value_or(QualityParams::normalized_for(vectors.size()));

    const auto t0 = std::chrono::steady_clock::now();
    const DistanceMatrix distances(vectors, metric);
    std::vector<std::optional<std::string>> labels(stories.begin(), stories.end());

    std::vector<GridPoint> curve(grid.size());
    std::vector<DbscanResult> clusterings(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            clusterings[i] = dbscan(distances, grid[i], min_size);
            curve[i] = {grid[i], cluster_quality(clusterings[i].cluster_of, labels, qp), clusterings[i].cluster_count};
        }
    };
    const std::size_t threads =
        std::max<std::size_t>(1, std::min<std::size_t>(grid.size(), std::thread::hardware_concurrency()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const auto& c = curve[i];
        const auto& b = curve[best];
        if (c.quality.score > b.quality.score || (c.quality.score == b.quality.score && c.epsilon < b.epsilon)) best = i;
    }

    GridSearchResult result;
    result.best_epsilon = curve[best].epsilon;
    result.best_clustering = std::move(clusterings[best]);
    const auto& q = curve[best].quality;
    result.report.embedding_name = std::move(embedding_name);
    result.report.clustering_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.report.time_taken_s = result.report.clustering_time_s;
    result.report.claims_clustered = q.n_c;
    result.report.cluster_count = curve[best].cluster_count;
    result.report.pct_majority = 100.0 * q.p_cc;
    result.report.pct_one_story = 100.0 * q.p_os;
    result.curve = std::move(curve);
    return result;
}

GridSearchResult grid_search_epsilon(std::span<const StoryClaim> claims, const Embedder& embedder,
                                     std::span<const double> grid, std::size_t min_size,
                                     std::optional<QualityParams> params, std::optional<Metric> metric) {
    if (claims.empty()) throw EmptyDatasetError("no claims to cluster");
    std::vector<std::string> texts, stories;
    texts.reserve(claims.size());
    stories.reserve(claims.size());
    for (const auto& c : claims) {
        texts.push_back(c.text);
        stories.push_back(c.story_id);
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto vectors = embedder.embed(texts);
    const double embed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto result = grid_search_epsilon(vectors, stories, grid, min_size, params,
                                      metric.value_or(embedder.preferred_metric()), embedder.name());
    result.report.embedding_time_s = embed_s;
    result.report.time_taken_s = embed_s + result.report.clustering_time_s;
    return result;
}

void write_report_csv(std::ostream& out, std::span<const ClusteringReportRow> rows) {
    out << "embedding,time_taken_s,embedding_time_s,clustering_time_s,claims_clustered,cluster_count,"
           "pct_majority,pct_one_story\n";
    char buf[512];
    for (const auto& r : rows) {
        std::string name = r.embedding_name;
        if (name.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : name) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            name = quoted + "\"";
        }
        std::snprintf(buf, sizeof buf, ",%.2f,%.2f,%.2f,%zu,%zu,%.2f,%.2f\n", r.time_taken_s, r.embedding_time_s,
                      r.clustering_time_s, r.claims_clustered, r.cluster_count, r.pct_majority, r.pct_one_story);
        out << name << buf;
    }
}

}  // namespace claimgraph
