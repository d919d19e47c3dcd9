#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimgraph/core.hpp"
#include "claimgraph/graph.hpp"

namespace claimgraph {

struct EngineConfig {
    double epsilon = 1.0;
    Metric metric = Metric::euclidean;
    std::size_t dim = 512;
    /// Louvain on edge weights 1 - d/epsilon instead of the unweighted graph.
    bool weighted_edges = false;
    std::uint64_t louvain_seed = 0;
};

struct Edge {
    std::size_t a;  // node index, a < b
    std::size_t b;
    double distance;

    bool operator==(const Edge&) const = default;
};

using CommunityId = std::int64_t;

struct MergeEvent {
    CommunityId into;
    std::vector<CommunityId> from;
};

struct InsertionReport {
    std::string claim_id;
    std::size_t new_edges = 0;
    CommunityId community_id = 0;
    std::size_t subgraph_size = 1;
    double elapsed_ms = 0.0;
    std::vector<MergeEvent> merges;
};

struct SimilarClaim {
    std::size_t node;  // index into ClaimGraph::claim()
    double distance;
};

/// Claims linked whenever their distance is below epsilon, partitioned into
/// communities by Louvain. Not internally synchronised: callers serialise
/// writers and keep readers out while a write is in flight.
class ClaimGraph {
public:
    /// Throws InvalidArgumentError for epsilon <= 0 or dim == 0.
    explicit ClaimGraph(EngineConfig cfg);

    const EngineConfig& config() const noexcept { return cfg_; }
    std::size_t size() const noexcept { return claims_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    const Claim& claim(std::size_t node) const { return claims_.at(node); }
    std::optional<std::size_t> find(const std::string& claim_id) const;
    CommunityId community_of(std::size_t node) const { return community_.at(node); }
    std::span<const Neighbor> neighbors(std::size_t node) const { return adjacency_.at(node); }

    /// Adds the claim and an edge to every stored claim closer than epsilon,
    /// and gives it a fresh singleton community without re-clustering.
    /// Throws DuplicateClaimError / DimensionError.
    std::vector<Edge> link_claim(Claim c);

    /// link_claim followed by Louvain on the connected subgraph that holds
    /// the new claim. Community ids outside that subgraph never change;
    /// inside it each new community keeps the most common previous id among
    /// its members when that id is still free.
    InsertionReport insert_claim(Claim c);

    /// k nearest claims, ascending by distance, ties by claim id. `accept`
    /// filters candidates before ranking.
    std::vector<SimilarClaim> query_similar(const EmbeddingVector& v, std::size_t k,
                                            const std::function<bool(std::size_t)>& accept = {}) const;

    void set_factcheck(std::size_t node, Factcheck fc);

    /// Sorted (a, b) edge list.
    std::vector<Edge> edges() const;
    /// community id -> member nodes in ascending order.
    std::map<CommunityId, std::vector<std::size_t>> communities() const;
    std::size_t community_count() const;
    /// Nodes of the connected component containing `node`, ascending.
    std::vector<std::size_t> component_of(std::size_t node) const;

    /// Unweighted view of the whole graph, the input of modularity checks.
    WeightedGraph as_graph(bool weighted = false) const;
    /// Current communities as a dense partition over node indices.
    Partition partition() const;

    /// Rescans all pairs and checks the edge set, stored distances and that
    /// every community is connected. Returns a description of the first
    /// violation, or nullopt.
    std::optional<std::string> check_invariants() const;

    /// Snapshot document; save(load(x)) reproduces x byte for byte.
    std::string to_snapshot() const;
    static ClaimGraph from_snapshot(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static ClaimGraph load(const std::filesystem::path& path);

    double edge_weight(double distance) const noexcept;

private:
    std::size_t append_node(Claim c);
    double distance_to(std::size_t node, const float* v, double v_sq_norm) const noexcept;
    void recluster_component(std::size_t node, InsertionReport& report);

    EngineConfig cfg_;
    std::vector<Claim> claims_;
    std::vector<float> vectors_;     // row-major, size() x dim
    std::vector<double> sq_norms_;   // cosine only
    std::vector<std::vector<Neighbor>> adjacency_;  // weight field holds the distance
    std::vector<CommunityId> community_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t edge_count_ = 0;
    double total_degree_ = 0.0;  // twice the summed Louvain edge weight
    CommunityId next_community_ = 0;
};

}  // namespace claimgraph
