#include "claimgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <unordered_map>

namespace claimgraph {

void WeightedGraph::add_edge(std::size_t u, std::size_t v, double w) {
    if (u >= adj_.size() || v >= adj_.size()) throw InvalidArgumentError("edge endpoint out of range");
    if (u == v) {
        for (auto& nb : adj_[u]) {
            if (nb.node == u) {
                nb.weight += 2.0 * w;
                return;
            }
        }
        adj_[u].push_back({static_cast<std::uint32_t>(u), 2.0 * w});
        return;
    }
    adj_[u].push_back({static_cast<std::uint32_t>(v), w});
    adj_[v].push_back({static_cast<std::uint32_t>(u), w});
}

double WeightedGraph::degree(std::size_t u) const noexcept {
    double k = 0.0;
    for (const auto& nb : adj_[u]) k += nb.weight;
    return k;
}

double WeightedGraph::total_weight() const noexcept {
    double m2 = 0.0;
    for (std::size_t u = 0; u < adj_.size(); ++u) m2 += degree(u);
    return m2;
}

std::size_t WeightedGraph::edge_count() const noexcept {
    std::size_t count = 0;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
        for (const auto& nb : adj_[u]) count += nb.node >= u ? 1 : 0;
    }
    return count;
}

std::size_t Partition::community_count() const noexcept {
    if (community_of.empty()) return 0;
    std::vector<std::size_t> ids = community_of;
    std::sort(ids.begin(), ids.end());
    return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

Partition Partition::canonical() const {
    std::unordered_map<std::size_t, std::size_t> remap;
    Partition out;
    out.community_of.reserve(community_of.size());
    for (std::size_t c : community_of) {
        const auto [it, inserted] = remap.try_emplace(c, remap.size());
        out.community_of.push_back(it->second);
    }
    return out;
}

double modularity(const WeightedGraph& g, const Partition& p) { return modularity(g, p, g.total_weight()); }

double modularity(const WeightedGraph& g, const Partition& p, double m2) {
    if (p.size() != g.size()) throw InvalidArgumentError("partition does not cover the graph");
    if (m2 <= 0.0) throw UndefinedModularityError("modularity is undefined for a graph without edges");

    std::size_t max_id = 0;
    for (std::size_t c : p.community_of) max_id = std::max(max_id, c);
    std::vector<double> in(max_id + 1, 0.0), tot(max_id + 1, 0.0);
    for (std::size_t u = 0; u < g.size(); ++u) {
        const std::size_t cu = p.community_of[u];
        for (const auto& nb : g.neighbors(u)) {
            tot[cu] += nb.weight;
            if (p.community_of[nb.node] == cu) in[cu] += nb.weight;
        }
    }
    double q = 0.0;
    for (std::size_t c = 0; c <= max_id; ++c) q += in[c] / m2 - (tot[c] / m2) * (tot[c] / m2);
    return q;
}

std::vector<std::size_t> connected_components(const WeightedGraph& g) {
    constexpr auto unseen = static_cast<std::size_t>(-1);
    std::vector<std::size_t> comp(g.size(), unseen);
    std::size_t next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < g.size(); ++s) {
        if (comp[s] != unseen) continue;
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (const auto& nb : g.neighbors(u)) {
                if (comp[nb.node] == unseen) {
                    comp[nb.node] = next;
                    stack.push_back(nb.node);
                }
            }
        }
        ++next;
    }
    return comp;
}

namespace {

constexpr double kGainTolerance = 1e-12;
constexpr int kMaxSweeps = 10000;

struct Level {
    std::vector<std::vector<Neighbor>> adj;
    std::vector<double> degree;
    double m2 = 0.0;
};

Level level_from(const WeightedGraph& g) {
    Level lvl;
    lvl.adj.resize(g.size());
    lvl.degree.resize(g.size());
    for (std::size_t u = 0; u < g.size(); ++u) {
        const auto nbs = g.neighbors(u);
        lvl.adj[u].assign(nbs.begin(), nbs.end());
        lvl.degree[u] = g.degree(u);
        lvl.m2 += lvl.degree[u];
    }
    return lvl;
}

// One local-moving phase. Returns dense community ids (first-appearance
// order) and whether any node changed community.
std::vector<std::size_t> local_moving(const Level& lvl, std::mt19937_64& rng, bool& moved_any) {
    const std::size_t n = lvl.adj.size();
    std::vector<std::size_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> tot = lvl.degree;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> link_weight(n, 0.0);
    std::vector<std::size_t> touched;
    moved_any = false;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool moved = false;
        for (std::size_t u : order) {
            const std::size_t cu = comm[u];
            const double ku = lvl.degree[u];

            for (const auto& nb : lvl.adj[u]) {
                if (nb.node == u) continue;
                const std::size_t c = comm[nb.node];
                if (link_weight[c] == 0.0) touched.push_back(c);
                link_weight[c] += nb.weight;
            }

            tot[cu] -= ku;
            std::size_t best = cu;
            double best_gain = link_weight[cu] - tot[cu] * ku / lvl.m2;
            const double stay_gain = best_gain;
            for (std::size_t c : touched) {
                if (c == cu) continue;
                const double gain = link_weight[c] - tot[c] * ku / lvl.m2;
                if (gain <= stay_gain + kGainTolerance) continue;
                if (best == cu || gain > best_gain + kGainTolerance ||
                    (std::abs(gain - best_gain) <= kGainTolerance && c < best)) {
                    best = c;
                    best_gain = gain;
                }
            }
            tot[best] += ku;
            if (best != cu) {
                comm[u] = best;
                moved = true;
            }
            for (std::size_t c : touched) link_weight[c] = 0.0;
            touched.clear();
        }
        if (!moved) break;
        moved_any = true;
    }

    std::vector<std::size_t> dense(n, static_cast<std::size_t>(-1));
    std::size_t next = 0;
    for (std::size_t u = 0; u < n; ++u) {
        if (dense[comm[u]] == static_cast<std::size_t>(-1)) dense[comm[u]] = next++;
        comm[u] = dense[comm[u]];
    }
    return comm;
}

Level aggregate(const Level& lvl, const std::vector<std::size_t>& comm) {
    const std::size_t k = comm.empty() ? 0 : *std::max_element(comm.begin(), comm.end()) + 1;
    Level out;
    out.adj.resize(k);
    out.degree.assign(k, 0.0);
    out.m2 = lvl.m2;

    std::vector<double> acc(k, 0.0);
    std::vector<std::size_t> touched;
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t u = 0; u < comm.size(); ++u) members[comm[u]].push_back(u);

    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t u : members[c]) {
            for (const auto& nb : lvl.adj[u]) {
                const std::size_t d = comm[nb.node];
                if (acc[d] == 0.0) touched.push_back(d);
                acc[d] += nb.weight;
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::size_t d : touched) {
            out.adj[c].push_back({static_cast<std::uint32_t>(d), acc[d]});
            out.degree[c] += acc[d];
            acc[d] = 0.0;
        }
        touched.clear();
    }
    return out;
}

// Splits every community into its connected pieces on `g`.
Partition split_disconnected(const WeightedGraph& g, const Partition& p) {
    constexpr auto unseen = static_cast<std::size_t>(-1);
    Partition out{std::vector<std::size_t>(g.size(), unseen)};
    std::size_t next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < g.size(); ++s) {
        if (out.community_of[s] != unseen) continue;
        out.community_of[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (const auto& nb : g.neighbors(u)) {
                if (out.community_of[nb.node] == unseen && p.community_of[nb.node] == p.community_of[u]) {
                    out.community_of[nb.node] = next;
                    stack.push_back(nb.node);
                }
            }
        }
        ++next;
    }
    return out;
}

}  // namespace

LouvainResult louvain_traced(const WeightedGraph& g, std::uint64_t seed, double total_degree) {
    const std::size_t n = g.size();
    LouvainResult result;
    result.partition.community_of.resize(n);
    std::iota(result.partition.community_of.begin(), result.partition.community_of.end(), 0);
    if (n == 0 || g.total_weight() <= 0.0) return result;

    std::mt19937_64 rng(seed);
    Level lvl = level_from(g);
    if (total_degree > 0.0) {
        if (total_degree < lvl.m2 * (1.0 - 1e-9)) throw InvalidArgumentError("total_degree is below the graph's own");
        lvl.m2 = std::max(lvl.m2, total_degree);
    }
    const double m2 = lvl.m2;
    Partition& current = result.partition;
    result.modularity_per_pass.push_back(modularity(g, current, m2));

    while (true) {
        bool moved = false;
        const auto comm = local_moving(lvl, rng, moved);
        if (!moved) break;
        for (auto& c : current.community_of) c = comm[c];
        ++result.passes;
        result.modularity_per_pass.push_back(modularity(g, current, m2));
        lvl = aggregate(lvl, comm);
        if (lvl.adj.size() == 1) break;
    }

    current = split_disconnected(g, current).canonical();
    const double final_q = modularity(g, current, m2);
    if (final_q != result.modularity_per_pass.back()) result.modularity_per_pass.push_back(final_q);
    return result;
}

DistanceMatrix::DistanceMatrix(std::span<const EmbeddingVector> points, Metric metric) : n_(points.size()) {
    upper_.reserve(n_ > 1 ? n_ * (n_ - 1) / 2 : 0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) upper_.push_back(distance(points[i], points[j], metric));
    }
}

double DistanceMatrix::operator()(std::size_t i, std::size_t j) const noexcept {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return upper_[i * n_ - i * (i + 1) / 2 + (j - i - 1)];
}

DbscanResult dbscan(const DistanceMatrix& d, double epsilon, std::size_t min_size) {
    if (!(epsilon > 0.0)) throw InvalidArgumentError("dbscan epsilon must be positive");
    if (min_size == 0) throw InvalidArgumentError("dbscan min_size must be >= 1");

    const std::size_t n = d.size();
    std::vector<std::vector<std::size_t>> neighborhood(n);
    for (std::size_t i = 0; i < n; ++i) {
        neighborhood[i].push_back(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (d(i, j) < epsilon) {
                neighborhood[i].push_back(j);
                neighborhood[j].push_back(i);
            }
        }
    }

    constexpr int unvisited = -2;
    DbscanResult result;
    result.min_size = min_size;
    result.cluster_of.assign(n, unvisited);
    int cluster = 0;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (result.cluster_of[i] != unvisited) continue;
        if (neighborhood[i].size() < min_size) {
            result.cluster_of[i] = DbscanResult::noise;
            continue;
        }
        result.cluster_of[i] = cluster;
        queue.assign(neighborhood[i].begin(), neighborhood[i].end());
        while (!queue.empty()) {
            const std::size_t j = queue.front();
            queue.pop_front();
            if (result.cluster_of[j] == DbscanResult::noise) result.cluster_of[j] = cluster;
            if (result.cluster_of[j] != unvisited) continue;
            result.cluster_of[j] = cluster;
            if (neighborhood[j].size() >= min_size) {
                queue.insert(queue.end(), neighborhood[j].begin(), neighborhood[j].end());
            }
        }
        ++cluster;
    }
    result.cluster_count = static_cast<std::size_t>(cluster);
    return result;
}

DbscanResult dbscan(std::span<const EmbeddingVector> points, double epsilon, std::size_t min_size, Metric metric) {
    if (!(epsilon > 0.0)) throw InvalidArgumentError("dbscan epsilon must be positive");
    if (min_size == 0) throw InvalidArgumentError("dbscan min_size must be >= 1");
    return dbscan(DistanceMatrix(points, metric), epsilon, min_size);
}

}  // namespace claimgraph
