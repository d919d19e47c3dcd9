#include "claimgraph/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "claimgraph/json_io.hpp"

namespace claimgraph {

using io::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    std::uint64_t x = seed ^ (salt + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

ClaimGraph::ClaimGraph(EngineConfig cfg) : cfg_(cfg) {
    if (!(cfg_.epsilon > 0.0) || !std::isfinite(cfg_.epsilon)) {
        throw InvalidArgumentError("epsilon must be a positive finite number");
    }
    if (cfg_.dim == 0) throw InvalidArgumentError("engine dim must be >= 1");
}

std::optional<std::size_t> ClaimGraph::find(const std::string& claim_id) const {
    const auto it = index_.find(claim_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double ClaimGraph::distance_to(std::size_t node, const float* v, double v_sq_norm) const noexcept {
    const float* row = vectors_.data() + node * cfg_.dim;
    if (cfg_.metric == Metric::euclidean) return std::sqrt(kernel::squared_euclidean(row, v, cfg_.dim));
    const double cos = kernel::dot(row, v, cfg_.dim) / std::sqrt(sq_norms_[node] * v_sq_norm);
    return std::clamp(1.0 - cos, 0.0, 2.0);
}

double ClaimGraph::edge_weight(double distance) const noexcept {
    if (!cfg_.weighted_edges) return 1.0;
    return std::max(1.0 - distance / cfg_.epsilon, 1e-9);
}

std::size_t ClaimGraph::append_node(Claim c) {
    const std::size_t node = claims_.size();
    const auto values = c.embedding.values();
    vectors_.insert(vectors_.end(), values.begin(), values.end());
    if (cfg_.metric == Metric::cosine) sq_norms_.push_back(kernel::dot(values.data(), values.data(), values.size()));
    index_.emplace(c.id, node);
    claims_.push_back(std::move(c));
    adjacency_.emplace_back();
    community_.push_back(-1);
    return node;
}

std::vector<Edge> ClaimGraph::link_claim(Claim c) {
    if (c.embedding.dim() != cfg_.dim) {
        throw DimensionError("claim " + c.id + " has dim " + std::to_string(c.embedding.dim()) + ", engine dim is " +
                             std::to_string(cfg_.dim));
    }
    if (index_.contains(c.id)) throw DuplicateClaimError("claim id already stored: " + c.id);

    const float* v = c.embedding.values().data();
    double v_sq = 0.0;
    if (cfg_.metric == Metric::cosine) {
        v_sq = kernel::dot(v, v, cfg_.dim);
        if (v_sq == 0.0) throw DegenerateVectorError("claim " + c.id + " has a zero vector under cosine distance");
    }

    std::vector<Edge> added;
    const std::size_t n = claims_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = distance_to(i, v, v_sq);
        if (d < cfg_.epsilon) added.push_back({i, n, d});
    }

    const std::size_t node = append_node(std::move(c));
    for (const auto& e : added) {
        adjacency_[e.a].push_back({static_cast<std::uint32_t>(node), e.distance});
        adjacency_[node].push_back({static_cast<std::uint32_t>(e.a), e.distance});
    }
    edge_count_ += added.size();
    for (const auto& e : added) total_degree_ += 2.0 * edge_weight(e.distance);
    community_[node] = next_community_++;
    return added;
}

std::vector<std::size_t> ClaimGraph::component_of(std::size_t node) const {
    std::vector<char> seen(claims_.size(), 0);
    std::vector<std::size_t> out{node}, stack{node};
    seen.at(node) = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (const auto& nb : adjacency_[u]) {
            if (!seen[nb.node]) {
                seen[nb.node] = 1;
                out.push_back(nb.node);
                stack.push_back(nb.node);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void ClaimGraph::recluster_component(std::size_t node, InsertionReport& report) {
    const auto comp = component_of(node);
    report.subgraph_size = comp.size();
    if (comp.size() == 1) {
        community_[node] = next_community_++;
        report.community_id = community_[node];
        return;
    }

    std::unordered_map<std::size_t, std::size_t> local;
    local.reserve(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) local.emplace(comp[i], i);
    WeightedGraph g(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
        for (const auto& nb : adjacency_[comp[i]]) {
            if (nb.node > comp[i]) g.add_edge(i, local.at(nb.node), edge_weight(nb.weight));
        }
    }
    // The whole graph's null model: the component's share of global
    // modularity is what a full recompute would optimise.
    const Partition part = louvain(g, mix_seed(cfg_.louvain_seed, claims_.size()), total_degree_);

    std::vector<std::vector<std::size_t>> members(part.community_count());
    for (std::size_t i = 0; i < comp.size(); ++i) members[part.community_of[i]].push_back(comp[i]);
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });

    std::set<CommunityId> taken;
    for (std::size_t lc : order) {
        std::map<CommunityId, std::size_t> votes;
        for (std::size_t u : members[lc]) {
            if (u != node) ++votes[community_[u]];
        }
        CommunityId chosen = -1;
        std::size_t best = 0;
        for (const auto& [id, count] : votes) {
            if (count > best && !taken.contains(id)) {
                chosen = id;
                best = count;
            }
        }
        if (chosen < 0) chosen = next_community_++;
        taken.insert(chosen);
        if (votes.size() >= 2) {
            MergeEvent ev{chosen, {}};
            for (const auto& [id, count] : votes) ev.from.push_back(id);
            report.merges.push_back(std::move(ev));
        }
        for (std::size_t u : members[lc]) community_[u] = chosen;
    }
    report.community_id = community_[node];
}

InsertionReport ClaimGraph::insert_claim(Claim c) {
    const auto t0 = std::chrono::steady_clock::now();
    InsertionReport report;
    report.claim_id = c.id;
    const auto added = link_claim(std::move(c));
    report.new_edges = added.size();
    const std::size_t node = claims_.size() - 1;
    if (added.empty()) {
        report.community_id = community_[node];
    } else {
        // link_claim handed out a provisional singleton id; reclaim it when
        // nothing else has been allocated since.
        if (community_[node] == next_community_ - 1) --next_community_;
        community_[node] = -1;
        recluster_component(node, report);
    }
    report.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::vector<SimilarClaim> ClaimGraph::query_similar(const EmbeddingVector& v, std::size_t k,
                                                    const std::function<bool(std::size_t)>& accept) const {
    if (k == 0) throw InvalidArgumentError("k must be >= 1");
    if (v.dim() != cfg_.dim) {
        throw DimensionError("query has dim " + std::to_string(v.dim()) + ", engine dim is " +
                             std::to_string(cfg_.dim));
    }
    const float* q = v.values().data();
    double q_sq = 0.0;
    if (cfg_.metric == Metric::cosine) {
        q_sq = kernel::dot(q, q, cfg_.dim);
        if (q_sq == 0.0) throw DegenerateVectorError("cosine query with a zero vector");
    }
    std::vector<SimilarClaim> all;
    all.reserve(claims_.size());
    for (std::size_t i = 0; i < claims_.size(); ++i) {
        if (accept && !accept(i)) continue;
        all.push_back({i, distance_to(i, q, q_sq)});
    }
    const auto less = [&](const SimilarClaim& a, const SimilarClaim& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return claims_[a.node].id < claims_[b.node].id;
    };
    const std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), less);
    all.resize(take);
    return all;
}

void ClaimGraph::set_factcheck(std::size_t node, Factcheck fc) { claims_.at(node).factcheck = std::move(fc); }

std::vector<Edge> ClaimGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (std::size_t u = 0; u < adjacency_.size(); ++u) {
        for (const auto& nb : adjacency_[u]) {
            if (nb.node > u) out.push_back({u, nb.node, nb.weight});
        }
    }
    std::sort(out.begin(), out.end(), [](const Edge& x, const Edge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    return out;
}

std::map<CommunityId, std::vector<std::size_t>> ClaimGraph::communities() const {
    std::map<CommunityId, std::vector<std::size_t>> out;
    for (std::size_t u = 0; u < community_.size(); ++u) out[community_[u]].push_back(u);
    return out;
}

std::size_t ClaimGraph::community_count() const { return communities().size(); }

WeightedGraph ClaimGraph::as_graph(bool weighted) const {
    WeightedGraph g(claims_.size());
    for (std::size_t u = 0; u < adjacency_.size(); ++u) {
        for (const auto& nb : adjacency_[u]) {
            if (nb.node > u) g.add_edge(u, nb.node, weighted ? edge_weight(nb.weight) : 1.0);
        }
    }
    return g;
}

Partition ClaimGraph::partition() const {
    Partition p;
    p.community_of.reserve(community_.size());
    for (CommunityId c : community_) p.community_of.push_back(static_cast<std::size_t>(c));
    return p.canonical();
}

std::optional<std::string> ClaimGraph::check_invariants() const {
    for (std::size_t i = 0; i < claims_.size(); ++i) {
        std::map<std::size_t, double> stored;
        for (const auto& nb : adjacency_[i]) stored.emplace(nb.node, nb.weight);
        for (std::size_t j = 0; j < claims_.size(); ++j) {
            if (i == j) continue;
            const double d = distance(claims_[i].embedding, claims_[j].embedding, cfg_.metric);
            const auto it = stored.find(j);
            if ((d < cfg_.epsilon) != (it != stored.end())) {
                return "edge (" + claims_[i].id + ", " + claims_[j].id + ") disagrees with distance " +
                       std::to_string(d);
            }
            if (it != stored.end() && it->second != d) return "stored distance mismatch on " + claims_[i].id;
        }
        if (community_[i] < 0) return "claim " + claims_[i].id + " has no community";
    }
    for (const auto& [id, members] : communities()) {
        std::set<std::size_t> inside(members.begin(), members.end());
        std::set<std::size_t> reached{members.front()};
        std::vector<std::size_t> stack{members.front()};
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (const auto& nb : adjacency_[u]) {
                if (inside.contains(nb.node) && reached.insert(nb.node).second) stack.push_back(nb.node);
            }
        }
        if (reached.size() != members.size()) return "community " + std::to_string(id) + " is disconnected";
    }
    return std::nullopt;
}

std::string ClaimGraph::to_snapshot() const {
    json claims = json::array();
    for (const auto& c : claims_) claims.push_back(io::to_json(c));
    json edges_json = json::array();
    for (const auto& e : edges()) edges_json.push_back({claims_[e.a].id, claims_[e.b].id, e.distance});
    json comms = json::array();
    for (std::size_t u = 0; u < claims_.size(); ++u) comms.push_back({claims_[u].id, community_[u]});

    json doc = {{"manifest",
                 {{"format", "claimgraph-snapshot"},
                  {"version", 1},
                  {"epsilon", cfg_.epsilon},
                  {"metric", std::string(to_string(cfg_.metric))},
                  {"dim", cfg_.dim},
                  {"node_count", claims_.size()},
                  {"edge_count", edge_count_},
                  {"weighted_edges", cfg_.weighted_edges},
                  {"louvain_seed", cfg_.louvain_seed},
                  {"next_community_id", next_community_}}},
                {"claims", std::move(claims)},
                {"edges", std::move(edges_json)},
                {"communities", std::move(comms)}};
    return doc.dump();
}

ClaimGraph ClaimGraph::from_snapshot(std::string_view text) {
    try {
        const json doc = json::parse(text);
        const json& m = doc.at("manifest");
        if (m.value("format", std::string{}) != "claimgraph-snapshot") throw ParseError("not a claimgraph snapshot");
        EngineConfig cfg;
        cfg.epsilon = m.at("epsilon").get<double>();
        cfg.metric = parse_metric(m.at("metric").get<std::string>());
        cfg.dim = m.at("dim").get<std::size_t>();
        cfg.weighted_edges = m.value("weighted_edges", false);
        cfg.louvain_seed = m.value("louvain_seed", std::uint64_t{0});
        ClaimGraph g(cfg);

        for (const auto& cj : doc.at("claims")) {
            Claim c = io::claim_from_json(cj);
            if (c.embedding.dim() != cfg.dim) throw DimensionError("snapshot claim " + c.id + " has wrong dim");
            if (g.index_.contains(c.id)) throw DuplicateClaimError("snapshot repeats claim " + c.id);
            g.append_node(std::move(c));
        }
        if (g.size() != m.at("node_count").get<std::size_t>()) throw ParseError("snapshot node_count mismatch");

        for (const auto& ej : doc.at("edges")) {
            const std::size_t a = g.index_.at(ej.at(0).get<std::string>());
            const std::size_t b = g.index_.at(ej.at(1).get<std::string>());
            const double d = ej.at(2).get<double>();
            g.adjacency_[a].push_back({static_cast<std::uint32_t>(b), d});
            g.adjacency_[b].push_back({static_cast<std::uint32_t>(a), d});
            ++g.edge_count_;
        }
        // Restore insertion-time neighbour order so re-clustering sees the
        // same adjacency as the original process.
        for (auto& row : g.adjacency_) {
            std::sort(row.begin(), row.end(), [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
        }
        // Same summation order as insertion: by newer endpoint, then older.
        for (std::size_t u = 0; u < g.size(); ++u) {
            for (const auto& nb : g.adjacency_[u]) {
                if (nb.node < u) g.total_degree_ += 2.0 * g.edge_weight(nb.weight);
            }
        }
        for (const auto& cj : doc.at("communities")) {
            g.community_[g.index_.at(cj.at(0).get<std::string>())] = cj.at(1).get<CommunityId>();
        }
        g.next_community_ = m.at("next_community_id").get<CommunityId>();
        return g;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid snapshot: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ParseError(std::string("snapshot references an unknown claim: ") + e.what());
    }
}

void ClaimGraph::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("cannot write " + path.string());
    out << to_snapshot() << '\n';
}

ClaimGraph ClaimGraph::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_snapshot(ss.str());
}

}  // namespace claimgraph
