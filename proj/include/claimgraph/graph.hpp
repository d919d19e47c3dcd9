#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "claimgraph/core.hpp"

namespace claimgraph {

struct Neighbor {
    std::uint32_t node;
    double weight;
};

/// Undirected weighted graph as adjacency lists. A self-loop entry holds the
/// full diagonal value A_ii, so a node's degree is the plain sum of its row.
class WeightedGraph {
public:
    explicit WeightedGraph(std::size_t n = 0) : adj_(n) {}

    /// u != v: adds w to A_uv and A_vu. u == v: adds 2w to A_uu.
    void add_edge(std::size_t u, std::size_t v, double w = 1.0);

    std::size_t size() const noexcept { return adj_.size(); }
    std::span<const Neighbor> neighbors(std::size_t u) const noexcept { return adj_[u]; }
    double degree(std::size_t u) const noexcept;
    /// Sum of all degrees (2m).
    double total_weight() const noexcept;
    std::size_t edge_count() const noexcept;

private:
    std::vector<std::vector<Neighbor>> adj_;
};

/// Total assignment of nodes to dense community ids 0..count-1.
struct Partition {
    std::vector<std::size_t> community_of;

    std::size_t size() const noexcept { return community_of.size(); }
    std::size_t community_count() const noexcept;
    /// Relabels ids densely in order of first appearance.
    Partition canonical() const;

    bool operator==(const Partition&) const = default;
};

/// Q = sum_c [ in_c / 2m - (tot_c / 2m)^2 ].
/// Throws UndefinedModularityError for an edgeless graph.
double modularity(const WeightedGraph& g, const Partition& p);
/// Modularity with the null model of a larger graph whose total degree is
/// `total_degree` (twice its edge weight). `g` must be a union of that
/// graph's connected components; the result is their share of its modularity.
double modularity(const WeightedGraph& g, const Partition& p, double total_degree);

std::vector<std::size_t> connected_components(const WeightedGraph& g);

struct LouvainResult {
    Partition partition;
    /// Modularity of the partition induced on the input graph, starting with
    /// singletons and then after every aggregation pass. Empty when the graph
    /// has no edges.
    std::vector<double> modularity_per_pass;
    std::size_t passes = 0;
};

/// Two-phase Louvain: local moves of single nodes to the neighbouring
/// community with the largest positive modularity gain (ties to the smaller
/// community id), then aggregation of communities into nodes, repeated until
/// a pass moves nothing. Node visit order is a seeded shuffle. Communities
/// that end up disconnected are split into their components, which never
/// lowers modularity.
/// A positive `total_degree` optimises modularity against that null model
/// instead of g's own (see the three-argument modularity); the trace uses it
/// too.
LouvainResult louvain_traced(const WeightedGraph& g, std::uint64_t seed, double total_degree = 0.0);

inline Partition louvain(const WeightedGraph& g, std::uint64_t seed, double total_degree = 0.0) {
    return louvain_traced(g, seed, total_degree).partition;
}

/// Condensed pairwise distance matrix.
class DistanceMatrix {
public:
    DistanceMatrix(std::span<const EmbeddingVector> points, Metric metric);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept;

private:
    std::size_t n_;
    std::vector<double> upper_;
};

struct DbscanResult {
    static constexpr int noise = -1;

    std::vector<int> cluster_of;
    std::size_t min_size = 1;
    std::size_t cluster_count = 0;
};

/// Classic DBSCAN with strict neighbourhoods (d < epsilon, the point itself
/// included). A point is core when its neighbourhood holds at least min_size
/// points. Points are scanned in index order, so clusters are numbered by
/// their lowest core point and a border point joins the first cluster that
/// reaches it. With min_size = 1 the clusters are the connected components
/// of the epsilon-graph.
DbscanResult dbscan(std::span<const EmbeddingVector> points, double epsilon, std::size_t min_size, Metric metric);
DbscanResult dbscan(const DistanceMatrix& distances, double epsilon, std::size_t min_size);

}  // namespace claimgraph
