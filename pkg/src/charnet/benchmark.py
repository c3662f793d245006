"""Synthetic planted-partition benchmark standing in for a real character network.

Three blocks of 30 characters; each intra-block pair is linked with
probability 0.15 and each inter-block pair with probability 0.01.  Edge
weights are ``1 + Poisson(1)``.  The block is the class label.

:func:`benchmark_text` writes a matching synthetic "novel": one sentence per
unit of edge weight naming both endpoints, plus a few sentences per
character whose context words lean weakly towards a block-specific
vocabulary.  Word-context embeddings trained on it see the topology only
through sparse sentence co-occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CharacterGraph, build_graph

BLOCK_LABELS = ("A", "B", "C")


@dataclass(frozen=True)
class PlantedPartition:
    graph: CharacterGraph
    labels: dict[str, str]
    seed: int
    p_in: float
    p_out: float


def planted_partition(
    blocks: int = 3, block_size: int = 30, p_in: float = 0.15, p_out: float = 0.01, seed: int = 0
) -> PlantedPartition:
    rng = np.random.default_rng(seed)
    n = blocks * block_size
    names = [f"Char{i:02d}" for i in range(n)]
    block = np.repeat(np.arange(blocks), block_size)
    prob = np.where(block[:, None] == block[None, :], p_in, p_out)
    draws = rng.random((n, n))
    weights = 1 + rng.poisson(1.0, size=(n, n))
    edges = [
        (names[i], names[j], int(weights[i, j]))
        for i in range(n)
        for j in range(i + 1, n)
        if draws[i, j] < prob[i, j]
    ]
    labels = {names[i]: _block_label(int(block[i])) for i in range(n)}
    g = build_graph(edges, nodes=names, attributes={v: {"label": c} for v, c in labels.items()})
    return PlantedPartition(g, labels, seed, p_in, p_out)


def _block_label(b: int) -> str:
    return BLOCK_LABELS[b] if b < len(BLOCK_LABELS) else f"B{b}"


def benchmark_text(
    bench: PlantedPartition,
    sentences_per_character: int = 8,
    context_words: int = 5,
    topic_signal: float = 0.25,
    topic_vocab: int = 40,
    common_vocab: int = 120,
    seed: int | None = None,
) -> str:
    """Synthetic text whose sentence co-occurrences reproduce ``bench.graph``.

    Context words come from the character's block vocabulary with
    probability ``topic_signal`` and from a shared vocabulary otherwise.
    """
    rng = np.random.default_rng([bench.seed if seed is None else seed, 7])
    classes = sorted(set(bench.labels.values()))
    topic = {c: [f"w{k}{c.lower()}" for k in range(topic_vocab)] for c in classes}
    common = [f"w{k}" for k in range(common_vocab)]
    verbs = ["met", "saw", "followed", "fought", "greeted", "answered"]

    def filler(c: str, count: int) -> list[str]:
        words = []
        for _ in range(count):
            pool = topic[c] if rng.random() < topic_signal else common
            words.append(pool[int(rng.integers(len(pool)))])
        return words

    sentences = []
    for u, v, w in bench.graph.edges():
        for _ in range(w):
            a, b = (u, v) if rng.random() < 0.5 else (v, u)
            verb = verbs[int(rng.integers(len(verbs)))]
            sentences.append(" ".join([a, verb, b, *filler(bench.labels[a], 2)]) + ".")
    for v in bench.graph.nodes:
        for _ in range(sentences_per_character):
            sentences.append(" ".join([v, *filler(bench.labels[v], context_words)]) + ".")
    order = rng.permutation(len(sentences))
    lines = [sentences[i][0].upper() + sentences[i][1:] for i in order]
    paragraphs = [" ".join(lines[i : i + 10]) for i in range(0, len(lines), 10)]
    return "\n\n".join(paragraphs) + "\n"


def benchmark_corpus(bench: PlantedPartition, **text_options):
    """Tokenized synthetic text plus its resolved character mentions."""
    from .characters import compile_alias_table, extract_mentions
    from .corpus import RawDocument, load_corpus

    aliases = compile_alias_table([(v, v) for v in bench.graph.nodes])
    text = benchmark_text(bench, **text_options)
    corpus = load_corpus([RawDocument("benchmark", "Planted partition", text)], aliases.segmentation_config())
    return corpus, extract_mentions(corpus, aliases)


def benchmark_embeddings(bench: PlantedPartition, dim: int = 20, word_dim: int = 300, seed: int = 0) -> dict:
    """node2vec (p=q=1), Laplacian eigenmap and word-context vectors for every character."""
    from .embed import WalkConfig, character_vectors, laplacian_eigenmap, node2vec, word_embeddings

    g = bench.graph
    corpus, mentions = benchmark_corpus(bench)
    words = word_embeddings(corpus, mentions, dim=word_dim, min_count=1, seed=seed)
    return {
        "node2vec": node2vec(g, WalkConfig(p=1.0, q=1.0, seed=seed), dim=dim),
        "laplacian_eigenmap": laplacian_eigenmap(g, dim=dim, component="all"),
        "word_context": character_vectors(words, g.nodes),
    }
