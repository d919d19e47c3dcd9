#include "claimgraph/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "claimgraph/engine.hpp"
#include "claimgraph/errors.hpp"
#include "json.hpp"

namespace claimgraph {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgumentError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

bool at_most_linear(const std::vector<BenchPoint>& points) {
    if (points.empty()) return true;
    const auto& base = points.front();
    for (const auto& p : points) {
        const double ratio = static_cast<double>(p.size) / static_cast<double>(base.size);
        if (p.median_ms > 1.5 * ratio * base.median_ms + 1.0) return false;
    }
    return true;
}

BenchResult run_insert_bench(const BenchOptions& opts, const std::function<void(const BenchPoint&)>& progress) {
    if (opts.sizes.empty() || opts.samples == 0 || opts.topics == 0 || opts.dim == 0) {
        throw InvalidArgumentError("bench needs sizes, samples, topics and dim");
    }
    auto sizes = opts.sizes;
    std::sort(sizes.begin(), sizes.end());
    if (sizes.front() < opts.samples) throw InvalidArgumentError("every size must be >= samples");

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    std::uniform_int_distribution<std::size_t> pick(0, opts.topics - 1);
    std::vector<std::vector<float>> centres(opts.topics, std::vector<float>(opts.dim));
    for (auto& c : centres) {
        for (auto& x : c) x = gauss(rng);
    }

    ClaimGraph graph(EngineConfig{opts.epsilon, opts.metric, opts.dim, false, opts.seed});
    BenchResult result;
    std::vector<float> buf(opts.dim);
    std::vector<double> timings;
    std::vector<double> subgraphs;
    const auto started = std::chrono::steady_clock::now();

    std::size_t next = 0;
    for (std::size_t target : sizes) {
        timings.clear();
        subgraphs.clear();
        for (; next < target; ++next) {
            const auto& c = centres[pick(rng)];
            for (std::size_t i = 0; i < opts.dim; ++i) buf[i] = c[i] + static_cast<float>(opts.noise) * gauss(rng);
            Claim claim{"b" + std::to_string(next), Sentence{}, EmbeddingVector(buf), 1.0, Category::checkable,
                        std::nullopt};
            const auto report = graph.insert_claim(std::move(claim));
            if (next + opts.samples >= target) {
                timings.push_back(report.elapsed_ms);
                subgraphs.push_back(static_cast<double>(report.subgraph_size));
            }
        }
        BenchPoint p;
        p.size = target;
        p.median_ms = percentile(timings, 0.5);
        p.p95_ms = percentile(timings, 0.95);
        p.mean_ms = std::accumulate(timings.begin(), timings.end(), 0.0) / static_cast<double>(timings.size());
        p.max_ms = *std::max_element(timings.begin(), timings.end());
        p.mean_subgraph = std::accumulate(subgraphs.begin(), subgraphs.end(), 0.0) / static_cast<double>(subgraphs.size());
        result.points.push_back(p);
        if (progress) progress(p);
    }
    result.growth_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.at_most_linear = at_most_linear(result.points);
    return result;
}

std::string bench_to_json(const BenchOptions& opts, const BenchResult& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points) {
        pts.push_back({{"size", p.size},
                       {"median_ms", p.median_ms},
                       {"p95_ms", p.p95_ms},
                       {"mean_ms", p.mean_ms},
                       {"max_ms", p.max_ms},
                       {"mean_subgraph", p.mean_subgraph}});
    }
    return nlohmann::json{{"dim", opts.dim},
                          {"samples", opts.samples},
                          {"topics", opts.topics},
                          {"noise", opts.noise},
                          {"epsilon", opts.epsilon},
                          {"metric", to_string(opts.metric)},
                          {"seed", opts.seed},
                          {"growth_seconds", r.growth_seconds},
                          {"at_most_linear", r.at_most_linear},
                          {"points", std::move(pts)}}
        .dump(2);
}

}  // namespace claimgraph
