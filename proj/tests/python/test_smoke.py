import json
import math
import os
import pathlib

import pytest

import claimgraph as cg

DATA = pathlib.Path(os.environ.get("CLAIMGRAPH_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def test_distance_metrics():
    assert cg.distance([0, 0], [3, 4]) == 5.0
    assert cg.distance([1, 0], [0, 1], "cosine") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cg.distance([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        cg.distance([0, 0], [1, 1], "cosine")


def test_split_sentences_offsets():
    text = "A b. C d."
    spans = cg.split_sentences(text)
    assert [(s, e) for _, s, e in spans] == [(0, 4), (5, 9)]
    assert all(text[s:e] == t for t, s, e in spans)


def test_tfidf_and_classifier_roundtrip():
    rows = [json.loads(line) for line in (DATA / "detection_corpus.jsonl").read_text().splitlines() if line.strip()]
    texts = [r["text"] for r in rows]
    labels = [r["label"] == "checkable" for r in rows]
    model = cg.fit_tfidf(texts, 256)
    assert model.hash_dim == 256
    vec = model.embed(texts[0])
    assert math.isclose(sum(x * x for x in vec), 1.0, rel_tol=1e-5)
    assert cg.TfidfModel.from_json(model.to_json()).embed(texts[0]) == vec

    clf = cg.train_classifier([model.embed(t) for t in texts], labels, seed=3)
    predicted = [clf.predict(model.embed(t))[1] for t in texts]
    f1 = cg.evaluate_prf(predicted, labels)["f1"]
    baseline = cg.evaluate_prf([True] * len(labels), labels)["f1"]
    assert f1 > baseline
    assert cg.Classifier.from_json(clf.to_json()).weights == clf.weights


def test_graph_algorithms():
    triangles = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    assert cg.modularity(6, triangles, [0, 0, 0, 1, 1, 1]) == 0.5
    assert cg.louvain(6, triangles) == [0, 0, 0, 1, 1, 1]
    labels = cg.dbscan([[0.0], [0.5], [5.0]], 1.0, 2)
    assert labels[0] == labels[1] and labels[2] == -1


def test_evaluation_functions():
    best_t, best_f1, curve = cg.threshold_sweep([0.1, 0.2, 0.9], [True, True, False])
    assert best_f1 == 1.0 and 0.2 < best_t < 0.9
    assert len(curve) >= 2
    edges, dup, non = cg.distance_histogram([0.1, 0.2, 0.9], [True, True, False], 4)
    assert sum(dup) == 2 and sum(non) == 1 and len(edges) == 5
    q = cg.cluster_quality([0, 0, 0, 0], ["s1", "s1", "s1", "s2"])
    assert q["score"] == 3.0 and q["p_cc"] == 0.75
    with pytest.raises(cg.ClaimgraphError):
        cg.cluster_quality([0, 0], [None, "a"])


def test_engine_insert_and_snapshot():
    g = cg.ClaimGraph(epsilon=1.1, dim=1)
    g.insert("l", [0.0])
    g.insert("r", [2.0])
    report = g.insert("mid", [1.0], "bridge")
    assert report["subgraph_size"] == 3
    assert len(report["merges"]) == 1
    assert len(g.edges()) == 2
    assert len(g.communities()) == 1
    assert g.check_invariants() is None
    restored = cg.ClaimGraph.from_snapshot(g.to_snapshot())
    assert restored.to_snapshot() == g.to_snapshot()
    assert [cid for cid, _ in g.query_similar([0.9], 2)] == ["mid", "l"]
    with pytest.raises(KeyError):
        g.community_of("missing")


def test_cli_in_process(tmp_path):
    out = tmp_path / "model.json"
    code = cg.cli_run(["detect-train", "--corpus", str(DATA / "detection_corpus.jsonl"), "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["weights"]
    assert cg.cli_run(["not-a-command"]) == 1
