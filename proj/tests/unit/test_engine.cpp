#include <random>

#include "claimgraph/engine.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace claimgraph;
using fixtures::make_claim;

namespace {

oracle::EdgeSet edge_set(const ClaimGraph& g) {
    oracle::EdgeSet out;
    for (const auto& e : g.edges()) out.emplace(e.a, e.b);
    return out;
}

ClaimGraph graph_of(const std::vector<std::vector<float>>& pts, double eps, std::uint64_t seed = 0) {
    ClaimGraph g(EngineConfig{eps, Metric::euclidean, pts.front().size(), false, seed});
    for (std::size_t i = 0; i < pts.size(); ++i) g.insert_claim(make_claim("c" + std::to_string(i), pts[i]));
    return g;
}

}  // namespace

TEST_CASE("construction rejects bad configuration") {
    CHECK_THROWS_AS(ClaimGraph(EngineConfig{0.0, Metric::euclidean, 2}), InvalidArgumentError);
    CHECK_THROWS_AS(ClaimGraph(EngineConfig{-1.0, Metric::euclidean, 2}), InvalidArgumentError);
    CHECK_THROWS_AS(ClaimGraph(EngineConfig{1.0, Metric::euclidean, 0}), InvalidArgumentError);
}

TEST_CASE("link_claim basics") {
    ClaimGraph g(EngineConfig{1.0, Metric::euclidean, 2});
    CHECK(g.link_claim(make_claim("a", {0, 0})).empty());
    CHECK(g.size() == 1);
    const auto e = g.link_claim(make_claim("b", {0, 0.5}));
    REQUIRE(e.size() == 1);
    CHECK(e[0].distance == 0.5);
    CHECK(g.link_claim(make_claim("c", {0, 1.5})).size() == 0);  // exactly epsilon from b: no edge
    CHECK_THROWS_AS(g.link_claim(make_claim("a", {5, 5})), DuplicateClaimError);
    CHECK_THROWS_AS(g.link_claim(make_claim("d", {1, 2, 3})), DimensionError);
    CHECK(g.size() == 3);
}

TEST_CASE("identical vectors link at distance zero") {
    ClaimGraph g(EngineConfig{0.1, Metric::euclidean, 2});
    g.insert_claim(make_claim("a", {1, 1}));
    const auto r = g.insert_claim(make_claim("b", {1, 1}));
    CHECK(r.new_edges == 1);
    CHECK(g.edges()[0].distance == 0.0);
}

TEST_CASE("incremental edge set equals all-pairs thresholding") {
    std::mt19937_64 rng(101);
    const auto pts = fixtures::random_points(rng, 200, 8);
    const auto g = graph_of(pts, 3.2);
    CHECK(edge_set(g) == oracle::all_pairs_graph(pts, 3.2));
    CHECK_FALSE(g.check_invariants().has_value());
}

TEST_CASE("edge set does not depend on insertion order") {
    std::mt19937_64 rng(5);
    const auto pts = fixtures::random_points(rng, 80, 4);
    const auto g1 = graph_of(pts, 2.0);
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    ClaimGraph g2(EngineConfig{2.0, Metric::euclidean, 4});
    for (auto i : order) g2.insert_claim(make_claim("c" + std::to_string(i), pts[i]));
    std::set<std::pair<std::string, std::string>> e1, e2;
    for (const auto& e : g1.edges()) e1.emplace(std::minmax(g1.claim(e.a).id, g1.claim(e.b).id));
    for (const auto& e : g2.edges()) e2.emplace(std::minmax(g2.claim(e.a).id, g2.claim(e.b).id));
    CHECK(e1 == e2);
}

TEST_CASE("insert_claim: singletons, pairs, recompute scope") {
    ClaimGraph g(EngineConfig{1.0, Metric::euclidean, 2});
    const auto r0 = g.insert_claim(make_claim("a", {0, 0}));
    CHECK(r0.subgraph_size == 1);
    CHECK(r0.new_edges == 0);
    CHECK(r0.elapsed_ms >= 0.0);
    const auto far = g.insert_claim(make_claim("far", {50, 50}));
    CHECK(far.community_id != r0.community_id);

    const auto r1 = g.insert_claim(make_claim("b", {0, 0.5}));
    CHECK(r1.subgraph_size == 2);
    CHECK(g.community_of(*g.find("a")) == g.community_of(*g.find("b")));
    // Same as running Louvain on the whole two-node graph.
    ClaimGraph pair(EngineConfig{1.0, Metric::euclidean, 2});
    pair.link_claim(make_claim("a", {0, 0}));
    pair.link_claim(make_claim("b", {0, 0.5}));
    CHECK(louvain(pair.as_graph(), 0).community_count() == 1);
    // The untouched component keeps its id.
    CHECK(g.community_of(*g.find("far")) == far.community_id);
}

TEST_CASE("community ids outside the touched component are preserved verbatim") {
    std::mt19937_64 rng(17);
    auto pts = fixtures::clustered_points(rng, 6, 15, 4, 10.0f, 0.3f);
    ClaimGraph g(EngineConfig{1.5, Metric::euclidean, 4});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::map<std::size_t, CommunityId> before;
        for (std::size_t u = 0; u < g.size(); ++u) before[u] = g.community_of(u);
        g.insert_claim(make_claim("c" + std::to_string(i), pts[i]));
        const auto comp = g.component_of(g.size() - 1);
        const std::set<std::size_t> touched(comp.begin(), comp.end());
        for (const auto& [u, cid] : before) {
            if (!touched.contains(u)) CHECK(g.community_of(u) == cid);
        }
    }
    CHECK_FALSE(g.check_invariants().has_value());
}

TEST_CASE("a bridging claim merges communities and logs the merge") {
    ClaimGraph g(EngineConfig{1.1, Metric::euclidean, 1});
    g.insert_claim(make_claim("l", {0.0f}));
    g.insert_claim(make_claim("r", {2.0f}));
    const auto left = g.community_of(0), right = g.community_of(1);
    REQUIRE(left != right);
    const auto r = g.insert_claim(make_claim("mid", {1.0f}));
    CHECK(r.subgraph_size == 3);
    CHECK(g.community_count() == 1);
    REQUIRE(r.merges.size() == 1);
    CHECK(r.merges[0].into == g.community_of(0));
    CHECK(r.merges[0].from == std::vector<CommunityId>{std::min(left, right), std::max(left, right)});
}

TEST_CASE("incremental partition stays close to a full Louvain run") {
    std::mt19937_64 rng(23);
    const auto pts = fixtures::clustered_points(rng, 10, 20, 6, 3.0f, 0.6f);
    const auto g = graph_of(pts, 1.6);
    CHECK(edge_set(g) == oracle::all_pairs_graph(pts, 1.6));
    const auto full = g.as_graph();
    CHECK(modularity(full, g.partition()) >= modularity(full, louvain(full, 0)) - 0.02);
}

TEST_CASE("query_similar") {
    ClaimGraph empty(EngineConfig{1.0, Metric::euclidean, 3});
    CHECK(empty.query_similar(EmbeddingVector({1, 2, 3}), 5).empty());

    std::mt19937_64 rng(31);
    const auto pts = fixtures::random_points(rng, 300, 5);
    const auto g = graph_of(pts, 0.5);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pts.size(); ++i) ids.push_back("c" + std::to_string(i));
    for (int q = 0; q < 10; ++q) {
        const auto query = fixtures::random_points(rng, 1, 5)[0];
        const auto got = g.query_similar(EmbeddingVector(query), 10);
        const auto want = oracle::knn(pts, ids, query, 10);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(g.claim(got[i].node).id == want[i].first);
            CHECK(got[i].distance == doctest::Approx(want[i].second).epsilon(1e-12));
        }
    }
    const auto self = g.query_similar(EmbeddingVector(pts[42]), 3);
    CHECK(g.claim(self[0].node).id == "c42");
    CHECK(self[0].distance == 0.0);
    CHECK(g.query_similar(EmbeddingVector(pts[0]), 1000).size() == 300);
    const auto odd = g.query_similar(EmbeddingVector(pts[0]), 5, [](std::size_t n) { return n % 2 == 1; });
    for (const auto& s : odd) CHECK(s.node % 2 == 1);
    CHECK_THROWS_AS(g.query_similar(EmbeddingVector({1, 2}), 3), DimensionError);
}

TEST_CASE("query_similar ties break on claim id") {
    ClaimGraph g(EngineConfig{0.1, Metric::euclidean, 1});
    g.insert_claim(make_claim("zeta", {1.0f}));
    g.insert_claim(make_claim("alpha", {-1.0f}));
    const auto r = g.query_similar(EmbeddingVector({0.0f}), 2);
    CHECK(g.claim(r[0].node).id == "alpha");
    CHECK(g.claim(r[1].node).id == "zeta");
}

TEST_CASE("cosine engine rejects zero vectors and links similar directions") {
    ClaimGraph g(EngineConfig{0.2, Metric::cosine, 2});
    g.insert_claim(make_claim("a", {1, 0}));
    CHECK(g.insert_claim(make_claim("b", {10, 1})).new_edges == 1);
    CHECK(g.insert_claim(make_claim("c", {0, 1})).new_edges == 0);
    CHECK_THROWS_AS(g.insert_claim(make_claim("z", {0, 0})), DegenerateVectorError);
    CHECK_FALSE(g.find("z").has_value());
}

TEST_CASE("weighted mode keeps the same edges") {
    std::mt19937_64 rng(2);
    const auto pts = fixtures::clustered_points(rng, 5, 12, 3, 4.0f, 0.5f);
    ClaimGraph g(EngineConfig{1.5, Metric::euclidean, 3, true, 0});
    for (std::size_t i = 0; i < pts.size(); ++i) g.insert_claim(make_claim("c" + std::to_string(i), pts[i]));
    CHECK(edge_set(g) == oracle::all_pairs_graph(pts, 1.5));
    CHECK(g.edge_weight(0.0) == 1.0);
    CHECK(g.edge_weight(0.75) == doctest::Approx(0.5));
    CHECK_FALSE(g.check_invariants().has_value());
}

TEST_CASE("snapshot round-trip is byte-identical") {
    std::mt19937_64 rng(9);
    const auto pts = fixtures::clustered_points(rng, 4, 10, 3, 5.0f, 0.4f);
    auto g = graph_of(pts, 1.2);
    g.set_factcheck(3, Factcheck{Verdict::false_, "wrong figure", "2024-01-01T00:00:00.000Z", g.claim(3).id});
    const auto snap = g.to_snapshot();
    const auto back = ClaimGraph::from_snapshot(snap);
    CHECK(back.to_snapshot() == snap);
    CHECK(back.claim(3).factcheck->verdict == Verdict::false_);
    fixtures::TempDir dir;
    g.save(dir / "g.json");
    CHECK(ClaimGraph::load(dir / "g.json").to_snapshot() == snap);
    CHECK_THROWS_AS(ClaimGraph::from_snapshot("{}"), ParseError);
}
