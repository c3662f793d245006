"""Biased second-order random walks and node2vec embeddings."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..graph import CharacterGraph
from .matrix import EmbeddingMatrix
from .skipgram import skipgram_train


@dataclass(frozen=True)
class WalkConfig:
    p: float = 1.0
    q: float = 1.0
    walks_per_node: int = 10
    walk_length: int = 80
    seed: int = 0
    weighted: bool = False

    def __post_init__(self) -> None:
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.walks_per_node < 1 or self.walk_length < 2:
            raise ValueError("walks_per_node >= 1 and walk_length >= 2 required")


def _edge_weight(g: CharacterGraph, u: str, v: str, weighted: bool) -> float:
    return float(g.adjacency[u][v]) if weighted else 1.0


def transition_probabilities(
    g: CharacterGraph, prev: str | None, cur: str, p: float, q: float, weighted: bool = False
) -> dict[str, float]:
    """Distribution of the next node given the walk came from ``prev`` to ``cur``.

    Each neighbour ``x`` of ``cur`` gets ``w(cur, x)`` scaled by ``1/p`` when
    ``x == prev``, by 1 when ``x`` neighbours ``prev`` and by ``1/q``
    otherwise.  ``prev=None`` is the first step: plain weight-proportional.
    """
    nbrs = g.neighbors(cur)
    if not nbrs:
        return {}
    raw = []
    for x in nbrs:
        w = _edge_weight(g, cur, x, weighted)
        if prev is None:
            bias = 1.0
        elif x == prev:
            bias = 1.0 / p
        elif g.has_edge(x, prev):
            bias = 1.0
        else:
            bias = 1.0 / q
        raw.append(w * bias)
    total = sum(raw)
    return {x: r / total for x, r in zip(nbrs, raw)}


def node2vec_walks(g: CharacterGraph, cfg: WalkConfig) -> list[list[str]]:
    """``walks_per_node`` walks from every node, in (round, node) order.

    Each walk draws from its own generator seeded by
    ``(seed, round, node index)``, so a walk does not depend on the others.
    """
    cache: dict[tuple[str | None, str], tuple[list[str], np.ndarray]] = {}

    def step(prev: str | None, cur: str, rng: np.random.Generator) -> str | None:
        key = (prev, cur)
        if key not in cache:
            probs = transition_probabilities(g, prev, cur, cfg.p, cfg.q, cfg.weighted)
            cache[key] = (list(probs), np.cumsum(list(probs.values())))
        nbrs, cdf = cache[key]
        if not nbrs:
            return None
        k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        return nbrs[min(k, len(nbrs) - 1)]

    walks = []
    for r in range(cfg.walks_per_node):
        for i, start in enumerate(g.nodes):
            rng = np.random.default_rng([cfg.seed, r, i])
            walk = [start]
            prev = None
            while len(walk) < cfg.walk_length:
                nxt = step(prev, walk[-1], rng)
                if nxt is None:
                    break
                prev = walk[-1]
                walk.append(nxt)
            walks.append(walk)
    return walks


def node2vec(
    g: CharacterGraph,
    cfg: WalkConfig = WalkConfig(),
    dim: int = 20,
    window: int = 10,
    negatives: int = 5,
    epochs: int = 5,
    seed: int | None = None,
    learning_rate: float = 0.025,
) -> EmbeddingMatrix:
    """Skip-gram over node2vec walks, rows ordered like ``g.nodes``.

    Isolated nodes appear only as length-1 walks and keep their random
    initial vectors.
    """
    walks = node2vec_walks(g, cfg)
    emb = skipgram_train(
        walks,
        dim=dim,
        window=window,
        negative_samples=negatives,
        epochs=epochs,
        learning_rate=learning_rate,
        seed=cfg.seed if seed is None else seed,
        provenance="node2vec",
    )
    vectors = emb.aligned(g.nodes)
    config = dict(emb.config, walk=asdict(cfg))
    return EmbeddingMatrix(g.nodes, vectors, "node2vec", config, emb.diagnostics)
