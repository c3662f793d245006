"""Labels, splits, cross-validation, metrics and the embedding baselines."""

from __future__ import annotations

import csv
import io
import json
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .embed.matrix import EmbeddingMatrix
from .gnn.logistic import logistic_fit, logistic_predict
from .gnn.train import TrainConfig, sample_non_edges, train_link_predictor, train_node_classifier
from .graph import CharacterGraph, connected_components

# ----------------------------------------------------------------- labels


@dataclass(frozen=True)
class LabelAssignment:
    labels: dict[str, str]
    counts: dict[str, dict[str, int]]
    works: tuple[str, ...]

    def classes(self) -> tuple[str, ...]:
        present = set(self.labels.values())
        return tuple(w for w in self.works if w in present)

    def class_sizes(self) -> dict[str, int]:
        sizes = {w: 0 for w in self.works}
        for c in self.labels.values():
            sizes[c] += 1
        return sizes


def derive_labels(counts: Mapping[str, Mapping[str, int]], works: Sequence[str] | None = None) -> LabelAssignment:
    """Label each character with the work where its share of that work's mentions is largest.

    ``counts[character][work]`` is the number of named mentions.  The share
    divides by the total mentions of all characters in that work.  Ties go
    to the earlier work in ``works`` (default: sorted work ids).
    """
    if works is None:
        works = sorted({w for row in counts.values() for w in row})
    works = tuple(works)
    unknown = {w for row in counts.values() for w in row} - set(works)
    if unknown:
        raise ValueError(f"counts mention works outside the configured set: {sorted(unknown)}")
    totals = {w: sum(row.get(w, 0) for row in counts.values()) for w in works}
    labels = {}
    for c in sorted(counts):
        row = counts[c]
        if sum(row.values()) <= 0:
            raise ValueError(f"character {c!r} has no mentions")
        best, best_share = None, -1.0
        for w in works:
            share = row.get(w, 0) / totals[w] if totals[w] else 0.0
            if share > best_share:
                best, best_share = w, share
        labels[c] = best
    frozen = {c: {w: int(counts[c].get(w, 0)) for w in works} for c in sorted(counts)}
    return LabelAssignment(labels, frozen, works)


# ---------------------------------------------------------------- metrics


def macro_prf(y_true: Sequence, y_pred: Sequence) -> tuple[float, float, float]:
    """Macro (F1, precision, recall) over the classes present in ``y_true``."""
    y_true, y_pred = list(y_true), list(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} labels vs {len(y_pred)} predictions")
    classes = sorted(set(y_true), key=repr)
    if not classes:
        raise ValueError("no labels")
    f1s, ps, rs = [], [], []
    for c in classes:
        tp = sum(t == c and p == c for t, p in zip(y_true, y_pred))
        fp = sum(t != c and p == c for t, p in zip(y_true, y_pred))
        fn = sum(t == c and p != c for t, p in zip(y_true, y_pred))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        f1s.append(f1)
        ps.append(prec)
        rs.append(rec)
    return float(np.mean(f1s)), float(np.mean(ps)), float(np.mean(rs))


def _check_binary(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1-d sequences")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if y.min(initial=1) == y.max(initial=0) or len(y) == 0:
        raise ValueError("AUC needs both positive and negative labels")
    return s, y.astype(bool)


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney statistic: P(score of a positive > score of a negative), ties count half."""
    s, y = _check_binary(scores, labels)
    pos, neg = np.sort(s[y]), np.sort(s[~y])
    below = np.searchsorted(neg, pos, side="left")
    at_or_below = np.searchsorted(neg, pos, side="right")
    wins = below.sum() + 0.5 * (at_or_below - below).sum()
    return float(wins / (len(pos) * len(neg)))


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds) swept over every distinct score, from (0, 0) to (1, 1)."""
    s, y = _check_binary(scores, labels)
    thresholds = np.unique(s)[::-1]
    n_pos, n_neg = y.sum(), (~y).sum()
    tpr = [0.0] + [float((s[y] >= t).sum() / n_pos) for t in thresholds]
    fpr = [0.0] + [float((s[~y] >= t).sum() / n_neg) for t in thresholds]
    return np.array(fpr), np.array(tpr), np.concatenate([[np.inf], thresholds])


def trapezoid_auc(fpr: np.ndarray, tpr: np.ndarray) -> float:
    dx = np.diff(fpr)
    return float(np.sum(dx * (tpr[1:] + tpr[:-1]) / 2.0))


# ------------------------------------------------------------------ seeds


def derive_seed(master: int, *keys) -> int:
    """Stable 32-bit seed from a master seed and hashable keys (cell id, fold id, ...)."""
    parts = [int(master)] + [zlib.crc32(str(k).encode("utf-8")) for k in keys]
    return int(np.random.SeedSequence(parts).generate_state(1)[0])


# ---------------------------------------------------------------- reports


def _sd(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=0)) if len(values) else float("nan")


@dataclass(frozen=True)
class EvalReport:
    """Per-fold metrics plus mean and population standard deviation (ddof=0)."""

    task: str
    method: str
    feature_source: str
    folds: tuple[dict[str, float], ...]
    config: dict
    seed: int
    warnings: tuple[str, ...] = ()
    cell: str = ""

    @property
    def metric_names(self) -> tuple[str, ...]:
        return tuple(self.folds[0]) if self.folds else ()

    @property
    def aggregate(self) -> dict[str, tuple[float, float]]:
        return {
            k: (float(np.mean([f[k] for f in self.folds])), _sd([f[k] for f in self.folds]))
            for k in self.metric_names
        }

    def mean(self, metric: str) -> float:
        return self.aggregate[metric][0]

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "method": self.method,
            "feature_source": self.feature_source,
            "cell": self.cell,
            "seed": self.seed,
            "folds": [dict(f) for f in self.folds],
            "aggregate": {k: {"mean": m, "sd": s} for k, (m, s) in self.aggregate.items()},
            "config": self.config,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            data["task"], data["method"], data["feature_source"], tuple(data["folds"]),
            data["config"], data["seed"], tuple(data.get("warnings", ())), data.get("cell", ""),
        )


RESULT_COLUMNS = ("method", "feature_source", "task", "folds", "f1", "precision", "recall", "auc")


def results_table(reports: Sequence[EvalReport]) -> str:
    """CSV with one row per report; metric cells are ``mean±sd`` in percent."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in reports:
        agg = r.aggregate
        cells = []
        for k in ("f1", "precision", "recall", "auc"):
            cells.append(f"{100 * agg[k][0]:.2f}±{100 * agg[k][1]:.2f}" if k in agg else "")
        w.writerow([r.method, r.feature_source, r.task, len(r.folds), *cells])
    return buf.getvalue()


# ---------------------------------------------------------------- folds


def stratified_folds(labels: Sequence, k: int, seed: int) -> np.ndarray:
    """Fold index per item: shuffle each class, then deal all items round-robin.

    Fold sizes differ by at most one and each class is spread as evenly
    as its size allows.
    """
    labels = list(labels)
    n = len(labels)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must be between 1 and the number of labelled nodes ({n})")
    rng = np.random.default_rng(seed)
    order = []
    for c in sorted(set(labels), key=repr):
        members = [i for i, lbl in enumerate(labels) if lbl == c]
        order.extend(members[j] for j in rng.permutation(len(members)))
    folds = np.empty(n, dtype=np.int64)
    offset = int(rng.integers(k))
    for pos, i in enumerate(order):
        folds[i] = (pos + offset) % k
    return folds


def semi_supervised_mask(labels: Mapping[str, object], per_class: int, seed: int) -> list[str]:
    """``per_class`` randomly chosen labelled nodes of every class, sorted."""
    rng = np.random.default_rng([seed, 11])
    labelled = sorted(v for v, c in labels.items() if c is not None)
    chosen = []
    for c in sorted({labels[v] for v in labelled}, key=repr):
        members = [v for v in labelled if labels[v] == c]
        if per_class > len(members):
            raise ValueError(f"class {c!r} has only {len(members)} labelled nodes")
        chosen += [members[i] for i in rng.choice(len(members), per_class, replace=False)]
    return sorted(chosen)


FeatureSpec = "str | EmbeddingMatrix | np.ndarray"


def kfold_node_cv(
    g: CharacterGraph,
    features,
    labels: Mapping[str, object],
    k: int = 10,
    model: str = "gcn",
    config: TrainConfig | None = None,
    seed: int = 0,
    feature_source: str | None = None,
    logreg_epochs: int = 200,
) -> EvalReport:
    """Stratified k-fold node classification.

    ``model`` is ``"gcn"``, ``"gat"`` or ``"logreg"``.  GNNs see the whole
    graph and are trained on the labels of the other k-1 folds; logistic
    regression sees only the feature rows of the training nodes.
    """
    nodes = [v for v in g.nodes if labels.get(v) is not None]
    y = [labels[v] for v in nodes]
    folds = stratified_folds(y, k, seed)
    classes = sorted(set(y), key=repr)
    if feature_source is None:
        feature_source = features if isinstance(features, str) else getattr(features, "provenance", "matrix")
    if model != "logreg":
        config = config or TrainConfig.node_classification(model=model)
        if config.model != model:
            config = TrainConfig(**{**asdict(config), "model": model})
    elif isinstance(features, str):
        raise ValueError("logistic regression needs an embedding, not 'ohe'")
    warnings = []
    results = []
    for f in range(k):
        test = [v for v, fi in zip(nodes, folds) if fi == f]
        train = [v for v, fi in zip(nodes, folds) if fi != f]
        seen = {labels[v] for v in train}
        missing = [c for c in classes if c not in seen]
        if missing:
            warnings.append(f"fold {f}: classes {missing} absent from training labels")
        if model == "logreg":
            emb = features
            X_train = emb.aligned(train)
            clf = logistic_fit(X_train, [labels[v] for v in train], epochs=logreg_epochs, binary=False)
            pred = [clf.classes[i] for i in np.argmax(logistic_predict(clf, emb.aligned(test)), axis=1)]
        else:
            fold_cfg = TrainConfig(**{**asdict(config), "seed": derive_seed(seed, model, f)})
            res = train_node_classifier(g, features, labels, train, fold_cfg)
            preds = res.predictions
            pred = [preds[v] for v in test]
        f1, p, r = macro_prf([labels[v] for v in test], pred)
        results.append({"f1": f1, "precision": p, "recall": r})
    cfg = asdict(config) if config is not None else {"logreg_epochs": logreg_epochs}
    cfg = {**cfg, "k": k}
    return EvalReport("node_classification", model, feature_source, tuple(results), cfg, seed, tuple(warnings))


# ------------------------------------------------------------ edge splits


@dataclass(frozen=True)
class EdgeSplit:
    g_train: CharacterGraph
    test_pos: tuple[tuple[str, str], ...]
    test_neg: tuple[tuple[str, str], ...]
    train_connected: bool
    seed: int

    def test_pairs(self) -> tuple[list[tuple[str, str]], np.ndarray]:
        pairs = list(self.test_pos) + list(self.test_neg)
        return pairs, np.array([1] * len(self.test_pos) + [0] * len(self.test_neg))


def edge_split(g: CharacterGraph, holdout_fraction: float = 0.1, seed: int = 0) -> EdgeSplit:
    """Hold out ``round(fraction * m)`` uniformly chosen edges plus as many non-edges.

    Negatives are drawn from pairs unconnected in the full graph, so they
    avoid train and test positives alike.  ``train_connected`` records
    whether the training graph has as many components as the original.
    """
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError("holdout_fraction must be in (0, 1)")
    edges = list(g.edges())
    count = int(round(holdout_fraction * len(edges)))
    if count < 1 or count >= len(edges):
        raise ValueError(f"cannot hold out {holdout_fraction} of {len(edges)} edges")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(edges), size=count, replace=False)
    test_pos = tuple(sorted((edges[i][0], edges[i][1]) for i in chosen))
    g_train = g.without_edges(test_pos)
    max_neg = g.n * (g.n - 1) // 2 - g.m
    if count > max_neg:
        raise ValueError("not enough non-adjacent pairs for balanced negatives")
    A = g.adjacency_matrix()
    neg_idx: list[tuple[int, int]] = []
    seen = set()
    while len(neg_idx) < count:
        for a, b in sample_non_edges(rng, A, count):
            key = (min(a, b), max(a, b))
            if key not in seen and len(neg_idx) < count:
                seen.add(key)
                neg_idx.append(key)
    test_neg = tuple(sorted((g.nodes[a], g.nodes[b]) for a, b in neg_idx))
    connected = len(connected_components(g_train)) == len(connected_components(g))
    return EdgeSplit(g_train, test_pos, test_neg, connected, seed)


# --------------------------------------------------------------- baselines


def hadamard_features(emb: EmbeddingMatrix, pairs: Sequence[tuple[str, str]]) -> np.ndarray:
    if not len(pairs):
        return np.zeros((0, emb.dim))
    u = emb.aligned([a for a, _ in pairs])
    v = emb.aligned([b for _, b in pairs])
    return u * v


def embedding_link_baseline(
    emb: EmbeddingMatrix,
    g_train: CharacterGraph,
    test_pos: Sequence[tuple[str, str]],
    test_neg: Sequence[tuple[str, str]],
    seed: int = 0,
    epochs: int = 200,
) -> float:
    """AUC of binary logistic regression on Hadamard pair features.

    Training pairs are all edges of ``g_train`` plus as many sampled
    non-edges; test pairs are excluded from those negatives.
    """
    for v in g_train.nodes:
        if v not in emb:
            raise KeyError(f"no embedding vector for node {v!r}")
    idx = g_train.index
    pos = [(u, v) for u, v, _ in g_train.edges()]
    exclude = np.zeros((g_train.n, g_train.n), dtype=bool)
    for a, b in list(test_pos) + list(test_neg):
        exclude[idx[a], idx[b]] = exclude[idx[b], idx[a]] = True
    rng = np.random.default_rng([seed, 3])
    neg_idx = sample_non_edges(rng, g_train.adjacency_matrix(), len(pos), exclude)
    neg = [(g_train.nodes[a], g_train.nodes[b]) for a, b in neg_idx]
    X = hadamard_features(emb, pos + neg)
    y = [1] * len(pos) + [0] * len(neg)
    clf = logistic_fit(X, y, epochs=epochs, binary=True)
    test_pairs = list(test_pos) + list(test_neg)
    scores = clf.decision_function(hadamard_features(emb, test_pairs))
    return roc_auc(scores, [1] * len(test_pos) + [0] * len(test_neg))


def random_embedding(nodes: Sequence[str], dim: int = 20, seed: int = 0) -> EmbeddingMatrix:
    rng = np.random.default_rng(seed)
    return EmbeddingMatrix(tuple(nodes), rng.normal(size=(len(nodes), dim)), "random", {"dim": dim, "seed": seed})


def gnn_link_auc(split: EdgeSplit, features, config: TrainConfig) -> float:
    predictor = train_link_predictor(split.g_train, features, config)
    pairs, y = split.test_pairs()
    return roc_auc(predictor.score_pairs(pairs), y)


def link_prediction_cv(
    g: CharacterGraph,
    method: str,
    features: Callable[[CharacterGraph], object] | object = "ohe",
    repeats: int = 10,
    holdout_fraction: float = 0.1,
    seed: int = 0,
    config: TrainConfig | None = None,
    feature_source: str | None = None,
) -> EvalReport:
    """Repeat a seeded ``holdout_fraction`` edge holdout ``repeats`` times.

    ``method`` is ``"gcn"``, ``"gat"`` or ``"logreg"`` (Hadamard baseline).
    ``features`` is either a fixed feature spec or a callable that builds
    features from the training graph (graph embeddings must not see the
    held-out edges).
    """
    if method != "logreg":
        config = config or TrainConfig.link_prediction(model=method)
        if config.model != method:
            config = TrainConfig(**{**asdict(config), "model": method})
    warnings, folds = [], []
    for r in range(repeats):
        split = edge_split(g, holdout_fraction, derive_seed(seed, "split", r))
        if not split.train_connected:
            warnings.append(f"repeat {r}: holding out edges disconnected the training graph")
        feats = features(split.g_train) if callable(features) else features
        if feature_source is None:
            feature_source = feats if isinstance(feats, str) else getattr(feats, "provenance", "matrix")
        if method == "logreg":
            auc = embedding_link_baseline(feats, split.g_train, split.test_pos, split.test_neg, seed=split.seed)
        else:
            cfg = TrainConfig(**{**asdict(config), "seed": derive_seed(seed, method, r)})
            auc = gnn_link_auc(split, feats, cfg)
        folds.append({"auc": auc})
    cfg = asdict(config) if config is not None else {}
    cfg = {**cfg, "repeats": repeats, "holdout_fraction": holdout_fraction}
    return EvalReport("link_prediction", method, feature_source or "", tuple(folds), cfg, seed, tuple(warnings))


# -------------------------------------------------------------- experiments


class MissingArtifactError(FileNotFoundError):
    def __init__(self, path: Path, stage: str):
        super().__init__(f"missing artifact {path}; run the `{stage}` stage first")
        self.path = path
        self.stage = stage


ARTIFACT_STAGES = {
    "graph": "graph",
    "labels": "graph",
    "node2vec": "embed node2vec",
    "laplacian_eigenmap": "embed le",
    "word_context": "embed word",
}


@dataclass
class ExperimentConfig:
    """Grid of method x feature source x task over artifacts in ``artifact_dir``.

    Artifacts: ``graph_file`` (default ``graph.graphml``; node attribute ``label`` holds the class),
    and embeddings ``node2vec.csv``, ``laplacian_eigenmap.csv``,
    ``word_context.csv``.  For link prediction graph embeddings are
    recomputed on each training graph using ``embedding`` settings.
    """

    artifact_dir: str
    graph_file: str = "graph.graphml"
    methods: list[str] = field(default_factory=lambda: ["gcn"])
    feature_sources: list[str] = field(default_factory=lambda: ["ohe"])
    tasks: list[str] = field(default_factory=lambda: ["node_classification"])
    seed: int = 0
    folds: int = 10
    repeats: int = 10
    holdout_fraction: float = 0.1
    per_work: bool = False
    node_classification: dict = field(default_factory=dict)
    link_prediction: dict = field(default_factory=dict)
    embedding: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown experiment config keys: {sorted(extra)}")
        return cls(**data)


def _artifact(directory: Path, name: str, filename: str) -> Path:
    path = directory / filename
    if not path.exists():
        raise MissingArtifactError(path, ARTIFACT_STAGES[name])
    return path


def _graph_embedding(source: str, g: CharacterGraph, settings: dict, seed: int) -> EmbeddingMatrix:
    from .embed.node2vec import WalkConfig, node2vec
    from .embed.spectral import laplacian_eigenmap

    dim = int(settings.get("dim", 20))
    if source == "node2vec":
        cfg = WalkConfig(
            p=float(settings.get("p", 1.0)), q=float(settings.get("q", 1.0)),
            walks_per_node=int(settings.get("walks_per_node", 10)),
            walk_length=int(settings.get("walk_length", 80)), seed=seed,
        )
        return node2vec(g, cfg, dim=dim, window=int(settings.get("window", 10)),
                        epochs=int(settings.get("epochs", 5)))
    if source == "laplacian_eigenmap":
        return laplacian_eigenmap(g, dim=min(dim, g.n - 1), component="all")
    raise ValueError(source)


def run_experiment(config: ExperimentConfig) -> list[EvalReport]:
    """One EvalReport per (task, method, feature source) cell, or per work if ``per_work``."""
    from .graph import read_graphml

    root = Path(config.artifact_dir)
    g = read_graphml(_artifact(root, "graph", config.graph_file))
    labels = {v: g.node_attributes.get(v, {}).get("label") for v in g.nodes}
    if "node_classification" in config.tasks and not any(labels.values()):
        raise MissingArtifactError(root / config.graph_file, ARTIFACT_STAGES["labels"])

    loaded: dict[str, EmbeddingMatrix] = {}

    def fixed(source: str):
        if source == "ohe":
            return "ohe"
        if source not in loaded:
            loaded[source] = EmbeddingMatrix.load(_artifact(root, source, f"{source}.csv"))
        return loaded[source]

    reports = []
    for task in config.tasks:
        for method in config.methods:
            for source in config.feature_sources:
                if method == "logreg" and source == "ohe":
                    continue
                cell = f"{task}/{method}/{source}"
                if task == "node_classification":
                    cfg = TrainConfig.node_classification(model=method if method != "logreg" else "gcn",
                                                          feature_source=source, **config.node_classification)
                    rep = kfold_node_cv(g, fixed(source), labels, config.folds, method, cfg, config.seed, source)
                    reports.append(_with_cell(rep, cell))
                elif task == "link_prediction":
                    cfg = TrainConfig.link_prediction(model=method if method != "logreg" else "gcn",
                                                      feature_source=source, **config.link_prediction)
                    if source in ("node2vec", "laplacian_eigenmap"):
                        _artifact(root, source, f"{source}.csv")
                        feats = lambda gt, s=source: _graph_embedding(s, gt, config.embedding, config.seed)
                    else:
                        feats = fixed(source)
                    graphs = _per_work_graphs(g) if config.per_work else [("", g)]
                    for work, gw in graphs:
                        rep = link_prediction_cv(gw, method, feats, config.repeats, config.holdout_fraction,
                                                 config.seed, cfg if method != "logreg" else None, source)
                        reports.append(_with_cell(rep, f"{cell}/{work}" if work else cell))
                else:
                    raise ValueError(f"unknown task {task!r}")
    return reports


def _with_cell(rep: EvalReport, cell: str) -> EvalReport:
    return EvalReport(rep.task, rep.method, rep.feature_source, rep.folds, rep.config, rep.seed, rep.warnings, cell)


def _per_work_graphs(g: CharacterGraph) -> list[tuple[str, CharacterGraph]]:
    """Subgraphs induced by the ``works`` node attribute (``;``-separated work ids)."""
    works: dict[str, list[str]] = {}
    for v in g.nodes:
        for w in str(g.node_attributes.get(v, {}).get("works", "")).split(";"):
            if w:
                works.setdefault(w, []).append(v)
    if not works:
        raise ValueError("per-work mode needs a 'works' node attribute on the graph")
    return [(w, g.subgraph(works[w])) for w in sorted(works)]


def write_reports(reports: Sequence[EvalReport], out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_table(reports), encoding="utf-8")
    for i, r in enumerate(reports):
        name = (r.cell or f"{r.task}_{r.method}_{r.feature_source}").replace("/", "__")
        (out / f"report_{i:03d}_{name}.json").write_text(r.to_json() + "\n", encoding="utf-8")
