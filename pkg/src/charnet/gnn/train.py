"""Training loops for node classification and link prediction."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..embed.matrix import EmbeddingMatrix
from ..graph import CharacterGraph
from .layers import ModelParams, backward, forward, init_params, structure_for
from .optim import AdamState, adam_step

FEATURE_SOURCES = ("ohe", "node2vec", "word_context", "laplacian_eigenmap")


@dataclass(frozen=True)
class TrainConfig:
    task: str = "node_classification"
    model: str = "gcn"
    epochs: int = 5000
    learning_rate: float = 1e-4
    feature_source: str = "ohe"
    weighted_adjacency: bool = False
    seed: int = 0
    hidden: int = 20
    out_dim: int = 20
    dropout: float = 0.0
    weight_decay: float = 0.0
    standardize_features: bool = True

    def __post_init__(self) -> None:
        if self.task not in ("node_classification", "link_prediction"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.model not in ("gcn", "gat"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("epochs >= 1 and learning_rate > 0 required")
        if self.feature_source not in FEATURE_SOURCES:
            raise ValueError(f"unknown feature source {self.feature_source!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @classmethod
    def node_classification(cls, **overrides) -> "TrainConfig":
        return cls(**{"task": "node_classification", "epochs": 5000, "learning_rate": 1e-4, **overrides})

    @classmethod
    def link_prediction(cls, **overrides) -> "TrainConfig":
        return cls(**{"task": "link_prediction", "epochs": 15000, "learning_rate": 1e-3, **overrides})


def feature_matrix(
    g: CharacterGraph, features: str | EmbeddingMatrix | np.ndarray, standardize: bool = False
) -> np.ndarray:
    """Node features aligned with ``g.nodes``; ``"ohe"`` gives the identity.

    With ``standardize`` each embedding column is z-scored over all nodes
    (no labels involved); one-hot features are never rescaled.
    """
    if isinstance(features, str):
        if features != "ohe":
            raise ValueError(f"feature source {features!r} needs an EmbeddingMatrix")
        return np.eye(g.n)
    if isinstance(features, EmbeddingMatrix):
        X = features.aligned(g.nodes)
    else:
        X = np.asarray(features, dtype=np.float64)
        if X.shape[0] != g.n:
            raise ValueError(f"feature matrix has {X.shape[0]} rows for {g.n} nodes")
    if standardize:
        sd = X.std(axis=0)
        X = (X - X.mean(axis=0)) / np.where(sd > 1e-12, sd, 1.0)
    return X


def _dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray | None:
    if rate <= 0:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _apply_decay(grads: dict, params: ModelParams, weight_decay: float) -> dict:
    if not weight_decay:
        return grads
    return {k: g + weight_decay * params[k] if k.startswith("W") else g for k, g in grads.items()}


@dataclass(frozen=True)
class NodeClassifierResult:
    params: ModelParams
    nodes: tuple[str, ...]
    classes: tuple
    probabilities: np.ndarray
    hidden: np.ndarray
    loss_history: tuple[float, ...]
    config: TrainConfig

    @property
    def predictions(self) -> dict[str, object]:
        idx = np.argmax(self.probabilities, axis=1)
        return {v: self.classes[i] for v, i in zip(self.nodes, idx)}

    def hidden_embedding(self) -> EmbeddingMatrix:
        return EmbeddingMatrix(self.nodes, self.hidden, "gnn_hidden", asdict(self.config))


def _softmax_xent(logits: np.ndarray, y: np.ndarray, rows: np.ndarray) -> tuple[float, np.ndarray]:
    z = logits[rows]
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    k = len(rows)
    loss = float(-np.mean(logp[np.arange(k), y[rows]]))
    d = np.exp(logp)
    d[np.arange(k), y[rows]] -= 1.0
    d_logits = np.zeros_like(logits)
    d_logits[rows] = d / k
    return loss, d_logits


def node_classification_loss(
    params: ModelParams, X: np.ndarray, structure: np.ndarray, y: np.ndarray, rows: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean softmax cross-entropy over ``rows`` and parameter gradients."""
    logits, cache = forward(params, X, structure)
    loss, d_logits = _softmax_xent(logits, y, rows)
    return loss, backward(params, cache, d_logits)


def _mask_rows(g: CharacterGraph, train_mask) -> np.ndarray:
    mask = np.asarray(train_mask)
    if mask.dtype == bool:
        if mask.shape != (g.n,):
            raise ValueError("boolean train mask must have one entry per node")
        return np.flatnonzero(mask)
    idx = g.index
    return np.array(sorted(idx[v] for v in train_mask), dtype=np.int64)


def train_node_classifier(
    g: CharacterGraph,
    features: str | EmbeddingMatrix | np.ndarray,
    labels: Mapping[str, object] | Sequence,
    train_mask: np.ndarray | Iterable[str],
    config: TrainConfig = TrainConfig(),
) -> NodeClassifierResult:
    """Transductive training: the whole graph is visible, loss only on masked nodes.

    ``labels`` maps node id to class (or is aligned with ``g.nodes``); nodes
    outside the mask may be unlabelled.  The output width is the number of
    distinct labels seen.
    """
    if isinstance(labels, Mapping):
        label_list = [labels.get(v) for v in g.nodes]
    else:
        label_list = list(labels)
    rows = _mask_rows(g, train_mask)
    if len(rows) == 0:
        raise ValueError("train mask is empty")
    if any(label_list[r] is None for r in rows):
        raise ValueError("every masked node needs a label")
    if len({label_list[r] for r in rows}) < 2:
        raise ValueError("train mask covers a single class")
    classes = tuple(sorted({lbl for lbl in label_list if lbl is not None}))
    cidx = {c: i for i, c in enumerate(classes)}
    y = np.array([cidx.get(lbl, 0) for lbl in label_list])

    X = feature_matrix(g, features, config.standardize_features)
    structure = structure_for(config.model, g, config.weighted_adjacency)
    params = init_params(config.model, X.shape[1], len(classes), config.hidden, config.seed)
    rng = np.random.default_rng([config.seed, 1])
    state = AdamState()
    history = []
    for _ in range(config.epochs):
        mask = _dropout_mask(rng, (g.n, config.hidden), config.dropout)
        logits, cache = forward(params, X, structure, mask)
        loss, d_logits = _softmax_xent(logits, y, rows)
        history.append(loss)
        grads = _apply_decay(backward(params, cache, d_logits), params, config.weight_decay)
        arrays, state = adam_step(params.arrays, grads, state, config.learning_rate)
        params = params.replace(arrays)
    logits, cache = forward(params, X, structure)
    z = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(z) / np.exp(z).sum(axis=1, keepdims=True)
    return NodeClassifierResult(params, g.nodes, classes, probs, cache["H1"], tuple(history), config)


@dataclass(frozen=True)
class LinkPredictor:
    params: ModelParams
    nodes: tuple[str, ...]
    node_vectors: np.ndarray
    loss_history: tuple[float, ...]
    config: TrainConfig
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._index.update({v: i for i, v in enumerate(self.nodes)})

    def score(self, u: str, v: str) -> float:
        """Logit ``sum(z_u * z_v)``; symmetric in ``u`` and ``v``."""
        return float(self.node_vectors[self._index[u]] @ self.node_vectors[self._index[v]])

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> np.ndarray:
        if not len(pairs):
            return np.zeros(0)
        u = np.array([self._index[a] for a, _ in pairs])
        v = np.array([self._index[b] for _, b in pairs])
        return np.einsum("ij,ij->i", self.node_vectors[u], self.node_vectors[v])


def sample_non_edges(
    rng: np.random.Generator, adjacency: np.ndarray, count: int, exclude: np.ndarray | None = None
) -> np.ndarray:
    """``count`` uniform node pairs ``(u, v)``, ``u != v``, not adjacent (nor in ``exclude``)."""
    n = adjacency.shape[0]
    blocked = adjacency > 0
    if exclude is not None:
        blocked = blocked | exclude
    out = np.empty((0, 2), dtype=np.int64)
    while len(out) < count:
        cand = rng.integers(0, n, size=(2 * (count - len(out)) + 8, 2))
        ok = (cand[:, 0] != cand[:, 1]) & ~blocked[cand[:, 0], cand[:, 1]]
        out = np.vstack([out, cand[ok]])
    return out[:count]


def link_loss(
    params: ModelParams, X: np.ndarray, structure: np.ndarray, pairs: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean binary cross-entropy with logits of the Hadamard decoder."""
    Z, cache = forward(params, X, structure)
    loss, dZ = _link_loss_from_vectors(Z, pairs, targets)
    return loss, backward(params, cache, dZ)


def _link_loss_from_vectors(Z: np.ndarray, pairs: np.ndarray, targets: np.ndarray):
    zu, zv = Z[pairs[:, 0]], Z[pairs[:, 1]]
    s = np.einsum("ij,ij->i", zu, zv)
    loss = float(np.mean(np.logaddexp(0.0, s) - targets * s))
    g = (0.5 * (1.0 + np.tanh(0.5 * s)) - targets) / len(s)
    dZ = np.zeros_like(Z)
    np.add.at(dZ, pairs[:, 0], g[:, None] * zv)
    np.add.at(dZ, pairs[:, 1], g[:, None] * zu)
    return loss, dZ


def train_link_predictor(
    g_train: CharacterGraph,
    features: str | EmbeddingMatrix | np.ndarray,
    config: TrainConfig = TrainConfig.link_prediction(),
) -> LinkPredictor:
    """Fit node vectors whose pairwise dot products score links.

    Every epoch pairs all training edges with as many freshly drawn
    non-edges of the training graph.
    """
    if g_train.m == 0:
        raise ValueError("training graph has no edges")
    X = feature_matrix(g_train, features, config.standardize_features)
    structure = structure_for(config.model, g_train, config.weighted_adjacency)
    params = init_params(config.model, X.shape[1], config.out_dim, config.hidden, config.seed)
    idx = g_train.index
    pos = np.array([(idx[u], idx[v]) for u, v, _ in g_train.edges()], dtype=np.int64)
    A = g_train.adjacency_matrix()
    targets = np.concatenate([np.ones(len(pos)), np.zeros(len(pos))])
    rng = np.random.default_rng([config.seed, 2])
    state = AdamState()
    history = []
    for _ in range(config.epochs):
        neg = sample_non_edges(rng, A, len(pos))
        pairs = np.vstack([pos, neg])
        mask = _dropout_mask(rng, (g_train.n, config.hidden), config.dropout)
        Z, cache = forward(params, X, structure, mask)
        loss, dZ = _link_loss_from_vectors(Z, pairs, targets)
        history.append(loss)
        grads = _apply_decay(backward(params, cache, dZ), params, config.weight_decay)
        arrays, state = adam_step(params.arrays, grads, state, config.learning_rate)
        params = params.replace(arrays)
    Z, _ = forward(params, X, structure)
    return LinkPredictor(params, g_train.nodes, Z, tuple(history), config)


def save_checkpoint(path: str | Path, params: ModelParams, config: TrainConfig, **extra) -> None:
    payload = {"config": asdict(config), "params": params.to_dict(), **extra}
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[ModelParams, TrainConfig, dict]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    params = ModelParams.from_dict(data.pop("params"))
    config = TrainConfig(**data.pop("config"))
    return params, config, data


def training_log_csv(losses: Sequence[float], metric: Sequence[float] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epoch", "loss"] + (["metric"] if metric is not None else []))
    for i, loss in enumerate(losses, 1):
        row = [i, repr(float(loss))]
        if metric is not None:
            row.append(repr(float(metric[i - 1])))
        writer.writerow(row)
    return buf.getvalue()
