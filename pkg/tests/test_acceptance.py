"""Acceptance criteria 1-11, each at its stated tolerance and runtime budget."""

import itertools
import json
import shutil
import time
from fractions import Fraction

import numpy as np
import pytest

from charnet.benchmark import benchmark_embeddings, planted_partition
from charnet.cli import main
from charnet.embed import laplacian_eigenmap, normalized_laplacian, transition_probabilities
from charnet.evaluation import (
    derive_seed,
    edge_split,
    embedding_link_baseline,
    kfold_node_cv,
    link_prediction_cv,
    macro_prf,
    random_embedding,
    roc_auc,
    roc_curve,
    semi_supervised_mask,
    trapezoid_auc,
)
from charnet.gnn import TrainConfig, gradient_check, random_connected_graph, train_node_classifier
from charnet.graph import betweenness, build_graph, density, mean_degree

from acceptance_log import record
from conftest import load_gold_chart
from oracles import brute_force_betweenness, jacobi_eigenvalues, random_connected_adjacency


def graph_with(n, m):
    names = [f"v{i:03d}" for i in range(n)]
    pairs = itertools.islice(itertools.combinations(names, 2), m)
    return build_graph([(a, b, 1) for a, b in pairs], nodes=names)


@pytest.fixture(scope="module")
def bench():
    return planted_partition()


@pytest.fixture(scope="module")
def bench_features(bench):
    start = time.perf_counter()
    embs = benchmark_embeddings(bench)
    return embs, time.perf_counter() - start


def test_criterion_01_density_and_mean_degree():
    hobbit, legendarium = graph_with(30, 119), graph_with(238, 1233)
    d_h, d_l = density(hobbit), density(legendarium)
    k_h, k_l = mean_degree(hobbit), mean_degree(legendarium)
    ok = (
        round(d_h, 4) == 0.1368 and round(d_l, 4) == 0.0219
        and round(d_h, 2) == 0.14 and abs(d_l - 0.023) <= 0.0015
        and round(k_h, 2) == 7.93 and round(k_l, 2) == 10.36
        and abs(k_h - 8.0) <= 0.15 and abs(k_l - 10.48) <= 0.15
    )
    record(1, "density / mean degree parity", ok,
           f"density {d_h:.4f} {d_l:.4f}, mean degree {k_h:.2f} {k_l:.2f}")
    assert ok


def test_criterion_02_betweenness_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        adj = random_connected_adjacency(rng, int(rng.integers(2, 9)), float(rng.uniform(0.0, 0.6)))
        g = build_graph([(u, v, 1) for u in adj for v in adj[u] if u < v], nodes=list(adj))
        fast, slow = betweenness(g), brute_force_betweenness(adj)
        worst = max(worst, max(abs(fast[v] - slow[v]) for v in adj))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 10
    record(2, "Brandes vs brute force", ok, f"100 graphs, max error {worst:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_03_laplacian_eigenmap(bench):
    start = time.perf_counter()
    k3 = build_graph([("A", "B", 1), ("B", "C", 1), ("A", "C", 1)])
    e = laplacian_eigenmap(k3, dim=2)
    k3_err = max(abs(x - 1.5) for x in e.diagnostics["eigenvalues"])
    oracle_err = float(np.max(np.abs(jacobi_eigenvalues(normalized_laplacian(k3))[1:] - 1.5)))
    residuals = [e.diagnostics["max_residual"]]
    rng = np.random.default_rng(3)
    graphs = [random_connected_graph(n, n, rng) for n in (5, 10, 20, 40)] + [bench.graph]
    for g in graphs:
        for weighted in (False, True):
            emb = laplacian_eigenmap(g, dim=min(20, g.n - 2), weighted=weighted, component="all")
            L = normalized_laplacian(g, weighted)
            lam = np.array(emb.diagnostics["eigenvalues"])
            residuals.append(float(np.max(np.abs(L @ emb.vectors - emb.vectors * lam))))
    elapsed = time.perf_counter() - start
    ok = max(residuals) < 1e-8 and k3_err <= 1e-9 and oracle_err <= 1e-9 and elapsed < 5
    record(3, "Laplacian eigenmap", ok,
           f"max residual {max(residuals):.1e}, K3 error {k3_err:.1e} (Jacobi {oracle_err:.1e}), {elapsed:.2f}s")
    assert ok


def test_criterion_04_node2vec_transitions():
    start = time.perf_counter()
    path = build_graph([("A", "B", 1), ("B", "C", 1), ("C", "D", 1)])
    probs = transition_probabilities(path, "A", "B", p=1, q=4)
    path_ok = abs(probs["A"] - 0.8) < 1e-12 and abs(probs["C"] - 0.2) < 1e-12
    worst_sum = worst_formula = worst_uniform = 0.0
    rng = np.random.default_rng(4)
    for trial in range(50):
        g = random_connected_graph(int(rng.integers(3, 9)), 6, rng)
        p, q = float(rng.uniform(0.25, 4)), float(rng.uniform(0.25, 4))
        for weighted in (False, True):
            for v in g.nodes:
                for t in g.neighbors(v):
                    got = transition_probabilities(g, t, v, p, q, weighted)
                    raw = {}
                    for x in g.neighbors(v):
                        w = g.weight(v, x) if weighted else 1.0
                        alpha = 1 / p if x == t else (1.0 if g.has_edge(t, x) else 1 / q)
                        raw[x] = w * alpha
                    total = sum(raw.values())
                    worst_sum = max(worst_sum, abs(sum(got.values()) - 1))
                    worst_formula = max(worst_formula, max(abs(got[x] - raw[x] / total) for x in raw))
                    uni = transition_probabilities(g, t, v, 1, 1, weighted)
                    wsum = sum(g.weight(v, x) if weighted else 1.0 for x in g.neighbors(v))
                    worst_uniform = max(worst_uniform, max(
                        abs(uni[x] - (g.weight(v, x) if weighted else 1.0) / wsum) for x in uni))
    elapsed = time.perf_counter() - start
    ok = path_ok and worst_sum <= 1e-12 and worst_formula <= 1e-12 and worst_uniform <= 1e-12 and elapsed < 5
    record(4, "node2vec transition law", ok,
           f"P(A)={probs['A']:.3f} P(C)={probs['C']:.3f}, sum error {worst_sum:.1e}, "
           f"formula error {worst_formula:.1e}, DeepWalk error {worst_uniform:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_05_gradient_checks():
    start = time.perf_counter()
    errors = {}
    for seed in range(3):
        for model in ("gcn", "gat"):
            for task in ("classification", "link"):
                for weighted in (False, True):
                    key = f"{model}/{task}/{'w' if weighted else 'u'}/{seed}"
                    errors[key] = gradient_check(model, seed=seed, task=task, weighted=weighted)
        errors[f"logistic/{seed}"] = gradient_check("logistic", seed=seed)
    elapsed = time.perf_counter() - start
    worst = max(errors, key=errors.get)
    ok = max(errors.values()) < 1e-4 and elapsed < 30
    record(5, "gradient checks", ok,
           f"{len(errors)} checks, worst {errors[worst]:.1e} ({worst}), {elapsed:.2f}s")
    assert ok


def test_criterion_06_node_classification_trend(bench, bench_features):
    embs, embed_seconds = bench_features
    start = time.perf_counter()
    labels = bench.labels
    gcn = {src: kfold_node_cv(bench.graph, "ohe" if src == "ohe" else embs[src], labels, 10, "gcn",
                              TrainConfig.node_classification(), 0, src).mean("f1")
           for src in ("ohe", "node2vec", "laplacian_eigenmap", "word_context")}
    lr = {src: kfold_node_cv(bench.graph, embs[src], labels, 10, "logreg", seed=0, feature_source=src).mean("f1")
          for src in ("node2vec", "laplacian_eigenmap", "word_context")}
    elapsed = time.perf_counter() - start + embed_seconds
    graph_sources = ("node2vec", "laplacian_eigenmap")
    gnn_best = max(gcn[s] for s in (*graph_sources, "word_context"))
    lr_best = max(lr[s] for s in graph_sources)
    paired = all(gcn[s] >= lr[s] for s in (*graph_sources, "word_context"))
    ok = gnn_best >= lr_best >= lr["word_context"] and paired and gcn["ohe"] >= 0.9 and elapsed < 180
    fmt = lambda d: ", ".join(f"{k} {v:.3f}" for k, v in d.items())
    record(6, "node classification trend", ok, f"GCN [{fmt(gcn)}]; LR [{fmt(lr)}]; {elapsed:.0f}s")
    assert ok


def test_criterion_07_semi_supervised(bench, bench_features):
    embs, _ = bench_features
    start = time.perf_counter()
    scores = {}
    for source in ("node2vec", "word_context"):
        scores[source] = []
        for s in range(10):
            mask = semi_supervised_mask(bench.labels, 1, s)
            res = train_node_classifier(bench.graph, embs[source], bench.labels, mask,
                                        TrainConfig.node_classification(seed=s))
            rest = [v for v in bench.graph.nodes if v not in mask]
            scores[source].append(macro_prf([bench.labels[v] for v in rest],
                                            [res.predictions[v] for v in rest])[0])
    elapsed = time.perf_counter() - start
    n2v = scores["node2vec"]
    ok = min(n2v) >= 0.7 and elapsed < 120
    record(7, "semi-supervised, 3 labels", ok,
           f"GCN+node2vec min {min(n2v):.3f} mean {np.mean(n2v):.3f}; "
           f"GCN+word_context mean {np.mean(scores['word_context']):.3f} (reported only); {elapsed:.0f}s")
    assert ok


def test_criterion_08_link_prediction_trend(bench):
    start = time.perf_counter()
    g = bench.graph
    rep = link_prediction_cv(g, "gcn", "ohe", repeats=10, holdout_fraction=0.1, seed=0,
                             config=TrainConfig.link_prediction())
    control = []
    for r in range(10):
        split = edge_split(g, 0.1, derive_seed(0, "split", r))
        emb = random_embedding(g.nodes, 20, derive_seed(0, "random", r))
        control.append(embedding_link_baseline(emb, split.g_train, split.test_pos, split.test_neg, seed=split.seed))
    elapsed = time.perf_counter() - start
    gcn_mean, gcn_sd = rep.aggregate["auc"]
    ctrl_mean = float(np.mean(control))
    ok = gcn_mean >= 0.8 and gcn_mean > ctrl_mean and abs(ctrl_mean - 0.5) <= 0.1 and elapsed < 300
    record(8, "link prediction trend", ok,
           f"GCN-OHE AUC {gcn_mean:.3f}±{gcn_sd:.3f} (target >= 0.8), random control {ctrl_mean:.3f}, "
           f"{elapsed:.0f}s")
    assert ok


def test_criterion_09_roc_auc_endpoints():
    perfect = roc_auc([0.9, 0.8, 0.7, 0.1], [1, 1, 0, 0])
    inverted = roc_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])
    rng = np.random.default_rng(9)
    random_auc = roc_auc(rng.random(1000), [1] * 500 + [0] * 500)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 80))
        scores = np.round(rng.random(n), int(rng.integers(1, 4)))
        y = rng.integers(0, 2, size=n)
        if y.min() == y.max():
            continue
        fpr, tpr, _ = roc_curve(scores, y)
        worst = max(worst, abs(trapezoid_auc(fpr, tpr) - roc_auc(scores, y)))
    ok = perfect == 1.0 and inverted == 0.0 and abs(random_auc - 0.5) <= 0.05 and worst <= 1e-9
    record(9, "ROC/AUC endpoints", ok,
           f"perfect {perfect}, inverted {inverted}, random {random_auc:.3f}, trapezoid gap {worst:.1e}")
    assert ok


def fixture_stages(out, *extra):
    common = ["--out", str(out), "--manifest", str(out / "fixture_manifest.json"),
              "--aliases", str(out / "fixture_aliases.tsv"), *extra]
    codes = [main(["fixture", "--out", str(out)])]
    codes += [main([stage, *common]) for stage in ("ingest", "mentions", "chart", "extract", "graph")]
    return codes, common


def test_criterion_10_fixture_pipeline(tmp_path, gold_dir):
    start = time.perf_counter()
    codes, _ = fixture_stages(tmp_path)
    edges_ok = (tmp_path / "edges.csv").read_text() == (gold_dir / "fixture_edges.csv").read_text()
    counts = json.loads((tmp_path / "mention_counts.json").read_text())
    gold = json.loads((gold_dir / "fixture_mention_counts.json").read_text())
    all_ok = {c: sum(w.values()) for c, w in counts["characters"].items()} == gold["all"]
    dialogue = {c: sum(counts["in_dialogue"].get(c, {}).values()) for c in gold["in_dialogue"]}
    dialogue_ok = dialogue == gold["in_dialogue"]
    pronouns_ok = counts["works"]["fixture"]["pronoun_token_count"] == gold["pronoun_tokens"]
    characters, columns = load_gold_chart()
    rows = [line.split(",") for line in (tmp_path / "chart.csv").read_text().splitlines()]
    chart_ok = [r[0] for r in rows[1:]] == characters and len(rows[0]) == 1 + len(columns) and all(
        float(rows[1 + i][1 + j]) == float(col[i]) for j, col in enumerate(columns) for i in range(len(characters)))
    elapsed = time.perf_counter() - start
    ok = codes == [0] * 6 and edges_ok and all_ok and dialogue_ok and pronouns_ok and chart_ok and elapsed < 10
    record(10, "end-to-end fixture pipeline", ok,
           f"exit codes {codes}, edges {edges_ok}, counts {all_ok}, dialogue {dialogue_ok}, "
           f"chart {chart_ok}, {elapsed:.2f}s")
    assert ok


def snapshot(out):
    return {str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*"))
            if p.is_file() and p.name != "charnet.log"}


def full_pipeline(out):
    """Every seeded stage: fixture text stages, then the benchmark through embed, train and evaluate."""
    codes, _ = fixture_stages(out / "fixture")
    bench_dir = out / "bench"
    codes.append(main(["fixture", "--out", str(bench_dir)]))
    cfg = bench_dir / "pipeline.json"
    cfg.write_text(json.dumps({
        "manifest": "benchmark_manifest.json", "aliases": "benchmark_aliases.tsv", "seed": 5,
        "word_dims": 16, "word_min_count": 1, "walks_per_node": 2, "walk_length": 20, "dims": 8,
        "epochs": 60, "lr": 0.01, "labels_per_class": 1,
        "experiment": {"methods": ["gcn"], "feature_sources": ["ohe", "node2vec"],
                       "tasks": ["node_classification", "link_prediction"], "folds": 3, "repeats": 2,
                       "node_classification": {"epochs": 20}, "link_prediction": {"epochs": 20},
                       "embedding": {"walks_per_node": 2, "walk_length": 20, "dim": 8}},
    }))
    common = ["--out", str(bench_dir), "--config", str(cfg)]
    for stage in (["ingest"], ["mentions"], ["chart"], ["extract"], ["graph"], ["embed", "word"]):
        codes.append(main([*stage, *common]))
    shutil.copy(bench_dir / "benchmark.graphml", bench_dir / "graph.graphml")
    for stage in (["embed", "node2vec"], ["embed", "le"], ["train", "classify", "--features", "node2vec"],
                  ["train", "linkpred"], ["evaluate"]):
        codes.append(main([*stage, *common]))
    return codes


def test_criterion_11_determinism(tmp_path):
    start = time.perf_counter()
    codes = full_pipeline(tmp_path)
    first = snapshot(tmp_path)
    codes += full_pipeline(tmp_path)
    second = snapshot(tmp_path)
    differing = sorted(k for k in first if first[k] != second.get(k))
    elapsed = time.perf_counter() - start
    ok = all(c == 0 for c in codes) and not differing and len(first) > 40
    record(11, "determinism", ok,
           f"{len(first)} files compared, {len(differing)} differ {differing[:3]}, exit codes ok "
           f"{all(c == 0 for c in codes)}, {elapsed:.0f}s")
    assert ok
