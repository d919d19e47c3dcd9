#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "claimgraph/core.hpp"

namespace claimgraph {

/// Synthetic workload for insert_claim latency: `topics` Gaussian centres in
/// `dim` dimensions with isotropic noise, epsilon between the intra- and
/// inter-topic distance scales.
struct BenchOptions {
    std::size_t dim = 512;
    std::vector<std::size_t> sizes{1000, 5000, 10000};
    std::size_t samples = 50;  // timed insertions ending at each size
    std::size_t topics = 100;
    double noise = 0.05;
    double epsilon = 3.0;
    Metric metric = Metric::euclidean;
    std::uint64_t seed = 0;
};

struct BenchPoint {
    std::size_t size = 0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    double mean_ms = 0.0;
    double max_ms = 0.0;
    double mean_subgraph = 0.0;
};

struct BenchResult {
    std::vector<BenchPoint> points;
    double growth_seconds = 0.0;
    /// median(n) <= 1.5 * (n / n0) * median(n0) + 1 ms for every measured n.
    bool at_most_linear = true;
};

/// Nearest-rank percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

bool at_most_linear(const std::vector<BenchPoint>& points);

/// `progress` (optional) is called after each measured size.
BenchResult run_insert_bench(const BenchOptions& opts,
                             const std::function<void(const BenchPoint&)>& progress = {});

std::string bench_to_json(const BenchOptions& opts, const BenchResult& r);

}  // namespace claimgraph
