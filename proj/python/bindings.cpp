#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "claimgraph/cli.hpp"
#include "claimgraph/detection.hpp"
#include "claimgraph/embeddings.hpp"
#include "claimgraph/engine.hpp"
#include "claimgraph/errors.hpp"
#include "claimgraph/evaluation.hpp"
#include "claimgraph/graph.hpp"

namespace py = pybind11;
using namespace claimgraph;

namespace {

std::vector<float> to_list(const EmbeddingVector& v) { return {v.values().begin(), v.values().end()}; }

EmbeddingVector vec(std::vector<float> v) { return EmbeddingVector(std::move(v)); }

std::vector<EmbeddingVector> vecs(const std::vector<std::vector<float>>& rows) {
    std::vector<EmbeddingVector> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.emplace_back(r);
    return out;
}

WeightedGraph make_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    WeightedGraph g(n);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw InvalidArgumentError("edge endpoint out of range");
        g.add_edge(u, v);
    }
    return g;
}

py::dict report_dict(const InsertionReport& r) {
    py::list merges;
    for (const auto& m : r.merges) merges.append(py::make_tuple(m.into, m.from));
    py::dict d;
    d["claim_id"] = r.claim_id;
    d["new_edges"] = r.new_edges;
    d["community_id"] = r.community_id;
    d["subgraph_size"] = r.subgraph_size;
    d["elapsed_ms"] = r.elapsed_ms;
    d["merges"] = merges;
    return d;
}

py::dict prf_dict(const PrfScores& s) {
    py::dict d;
    d["precision"] = s.precision;
    d["recall"] = s.recall;
    d["f1"] = s.f1;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of claimgraph";

    py::register_exception<Error>(m, "ClaimgraphError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DimensionError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const InvalidArgumentError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const DegenerateVectorError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const MissingVectorError& e) {
            PyErr_SetString(PyExc_KeyError, e.what());
        } catch (const UnknownClaimError& e) {
            PyErr_SetString(PyExc_KeyError, e.what());
        }
    });

    m.def(
        "distance",
        [](std::vector<float> a, std::vector<float> b, const std::string& metric) {
            return distance(vec(std::move(a)), vec(std::move(b)), parse_metric(metric));
        },
        py::arg("a"), py::arg("b"), py::arg("metric") = "euclidean");

    m.def(
        "split_sentences",
        [](const std::string& text, const std::string& article_id) {
            py::list out;
            for (const auto& s : split_sentences(text, article_id)) {
                out.append(py::make_tuple(s.text, s.char_start, s.char_end));
            }
            return out;
        },
        py::arg("text"), py::arg("article_id") = "", "List of (text, start, end) byte spans.");

    py::class_<TfidfModel>(m, "TfidfModel")
        .def_property_readonly("hash_dim", &TfidfModel::hash_dim)
        .def_property_readonly("num_documents", &TfidfModel::num_documents)
        .def("idf", [](const TfidfModel& t, const std::string& tok) { return t.idf(tok); })
        .def("embed", [](const TfidfModel& t, const std::string& text) { return to_list(embed_tfidf(t, text)); })
        .def("to_json", &TfidfModel::to_json)
        .def_static("from_json", [](const std::string& s) { return TfidfModel::from_json(s); });

    m.def(
        "fit_tfidf", [](const std::vector<std::string>& corpus, std::size_t dim) { return fit_tfidf(corpus, dim); },
        py::arg("corpus"), py::arg("hash_dim") = 512);

    py::class_<ClaimClassifier>(m, "Classifier")
        .def_readonly("weights", &ClaimClassifier::weights)
        .def_readonly("bias", &ClaimClassifier::bias)
        .def_readwrite("threshold", &ClaimClassifier::threshold)
        .def("predict",
             [](const ClaimClassifier& c, std::vector<float> x) {
                 const auto p = predict(c, vec(std::move(x)));
                 return py::make_tuple(p.score, p.is_claim);
             })
        .def("to_json", &ClaimClassifier::to_json)
        .def_static("from_json", [](const std::string& s) { return ClaimClassifier::from_json(s); });

    m.def(
        "train_classifier",
        [](const std::vector<std::vector<float>>& x, const std::vector<bool>& y, double l2_lambda, double learning_rate,
           int epochs, std::uint64_t seed) {
            if (x.size() != y.size()) throw AlignmentError("features and labels differ in length");
            std::vector<LabeledVector> data;
            for (std::size_t i = 0; i < x.size(); ++i) data.push_back({EmbeddingVector(x[i]), y[i]});
            return train_classifier(data, TrainOptions{l2_lambda, learning_rate, epochs, seed});
        },
        py::arg("x"), py::arg("y"), py::arg("l2_lambda") = 1e-4, py::arg("learning_rate") = 1.0,
        py::arg("epochs") = 300, py::arg("seed") = 0);

    m.def(
        "evaluate_prf",
        [](const std::vector<bool>& predicted, const std::vector<bool>& gold) {
            return prf_dict(evaluate_prf(predicted, gold));
        },
        py::arg("predicted"), py::arg("gold"));

    m.def(
        "modularity",
        [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
           const std::vector<std::size_t>& partition) {
            return modularity(make_graph(n, edges), Partition{partition});
        },
        py::arg("n"), py::arg("edges"), py::arg("partition"));

    m.def(
        "louvain",
        [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::uint64_t seed) {
            return louvain(make_graph(n, edges), seed).community_of;
        },
        py::arg("n"), py::arg("edges"), py::arg("seed") = 0);

    m.def(
        "dbscan",
        [](const std::vector<std::vector<float>>& points, double epsilon, std::size_t min_size, const std::string& metric) {
            return dbscan(vecs(points), epsilon, min_size, parse_metric(metric)).cluster_of;
        },
        py::arg("points"), py::arg("epsilon"), py::arg("min_size") = 1, py::arg("metric") = "euclidean",
        "Cluster id per point, -1 for noise.");

    m.def(
        "threshold_sweep",
        [](const std::vector<double>& distances, const std::vector<bool>& is_duplicate) {
            if (distances.size() != is_duplicate.size()) throw AlignmentError("distances and labels differ in length");
            std::vector<LabeledDistance> data;
            for (std::size_t i = 0; i < distances.size(); ++i) data.push_back({distances[i], is_duplicate[i]});
            const auto r = threshold_sweep(data);
            py::list curve;
            for (const auto& p : r.curve) curve.append(py::make_tuple(p.threshold, p.scores.f1));
            return py::make_tuple(r.best_threshold, r.best_f1, curve);
        },
        py::arg("distances"), py::arg("is_duplicate"));

    m.def(
        "distance_histogram",
        [](const std::vector<double>& distances, const std::vector<bool>& is_duplicate, std::size_t bins) {
            if (distances.size() != is_duplicate.size()) throw AlignmentError("distances and labels differ in length");
            std::vector<LabeledDistance> data;
            for (std::size_t i = 0; i < distances.size(); ++i) data.push_back({distances[i], is_duplicate[i]});
            const auto h = distance_histogram(data, bins);
            return py::make_tuple(h.edges, h.duplicate, h.non_duplicate);
        },
        py::arg("distances"), py::arg("is_duplicate"), py::arg("bins") = 20);

    m.def(
        "cluster_quality",
        [](const std::vector<int>& cluster_of, const std::vector<std::optional<std::string>>& stories, double a,
           double b, double c) {
            const auto q = cluster_quality(cluster_of, stories, QualityParams{a, b, c});
            py::dict d;
            d["score"] = q.score;
            d["p_os"] = q.p_os;
            d["p_cc"] = q.p_cc;
            d["n_c"] = q.n_c;
            return d;
        },
        py::arg("cluster_of"), py::arg("stories"), py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("c") = 1.0);

    m.def(
        "grid_search_epsilon",
        [](const std::vector<std::vector<float>>& points, const std::vector<std::string>& stories,
           const std::vector<double>& grid, std::size_t min_size, const std::string& metric) {
            const auto r = grid_search_epsilon(vecs(points), stories, grid, min_size, std::nullopt, parse_metric(metric));
            py::list curve;
            for (const auto& p : r.curve) curve.append(py::make_tuple(p.epsilon, p.quality.score, p.cluster_count));
            return py::make_tuple(r.best_epsilon, curve, r.best_clustering.cluster_of);
        },
        py::arg("points"), py::arg("stories"), py::arg("grid"), py::arg("min_size") = 2,
        py::arg("metric") = "euclidean");

    py::class_<ClaimGraph>(m, "ClaimGraph")
        .def(py::init([](double epsilon, std::size_t dim, const std::string& metric, bool weighted, std::uint64_t seed) {
                 return ClaimGraph(EngineConfig{epsilon, parse_metric(metric), dim, weighted, seed});
             }),
             py::arg("epsilon"), py::arg("dim"), py::arg("metric") = "euclidean", py::arg("weighted_edges") = false,
             py::arg("seed") = 0)
        .def("__len__", &ClaimGraph::size)
        .def(
            "insert",
            [](ClaimGraph& g, const std::string& id, std::vector<float> v, const std::string& text) {
                py::gil_scoped_release release;
                auto r = g.insert_claim(
                    Claim{id, Sentence{text, "", 0, text.size()}, vec(std::move(v)), 1.0, Category::checkable, std::nullopt});
                py::gil_scoped_acquire acquire;
                return report_dict(r);
            },
            py::arg("claim_id"), py::arg("vector"), py::arg("text") = "")
        .def("community_of",
             [](const ClaimGraph& g, const std::string& id) {
                 const auto node = g.find(id);
                 if (!node) throw UnknownClaimError("unknown claim: " + id);
                 return g.community_of(*node);
             })
        .def("edges",
             [](const ClaimGraph& g) {
                 py::list out;
                 for (const auto& e : g.edges()) out.append(py::make_tuple(g.claim(e.a).id, g.claim(e.b).id, e.distance));
                 return out;
             })
        .def("communities",
             [](const ClaimGraph& g) {
                 py::dict out;
                 for (const auto& [cid, members] : g.communities()) {
                     py::list ids;
                     for (auto u : members) ids.append(g.claim(u).id);
                     out[py::int_(cid)] = ids;
                 }
                 return out;
             })
        .def(
            "query_similar",
            [](const ClaimGraph& g, std::vector<float> v, std::size_t k) {
                py::list out;
                for (const auto& s : g.query_similar(vec(std::move(v)), k)) {
                    out.append(py::make_tuple(g.claim(s.node).id, s.distance));
                }
                return out;
            },
            py::arg("vector"), py::arg("k") = 5)
        .def("check_invariants", &ClaimGraph::check_invariants)
        .def("to_snapshot", &ClaimGraph::to_snapshot)
        .def_static("from_snapshot", [](const std::string& s) { return ClaimGraph::from_snapshot(s); });

    m.def("cli_run", [](const std::vector<std::string>& args) { return cli::run(args); }, py::arg("args"),
          "Runs one CLI subcommand in-process and returns its exit code.");
}
