from __future__ import annotations

from typing import Iterable

from ..characters import MentionRecord
from ..corpus import TokenizedCorpus
from .matrix import EmbeddingMatrix
from .skipgram import SkipgramError, skipgram_train


def canonical_token(canonical_id: str) -> str:
    """Single-token form of a character id: ``"Sam Gamgee"`` -> ``"Sam_Gamgee"``."""
    return "_".join(canonical_id.split())


def training_sentences(
    corpus: TokenizedCorpus, mentions: Iterable[MentionRecord] | None = None
) -> list[list[str]]:
    """Corpus sentences, with each resolved mention collapsed to its canonical token."""
    surfaces = corpus.surfaces
    starts = {}
    if mentions is not None:
        starts = {m.token_start: m for m in mentions}
    out = []
    for start, end in corpus.sentences:
        sent, i = [], start
        while i < end:
            m = starts.get(i)
            if m is not None:
                sent.append(canonical_token(m.canonical_id))
                i = m.token_end
            else:
                sent.append(surfaces[i])
                i += 1
        out.append(sent)
    return out


def word_embeddings(
    corpus: TokenizedCorpus,
    mentions: Iterable[MentionRecord] | None = None,
    dim: int = 300,
    window: int = 5,
    min_count: int = 5,
    negative_samples: int = 5,
    epochs: int = 5,
    learning_rate: float = 0.025,
    sample: float = 1e-3,
    seed: int = 0,
) -> EmbeddingMatrix:
    """Skip-gram word vectors over corpus sentences with word2vec-style defaults.

    When ``mentions`` are given, multi-token names are replaced by their
    canonical token first so each character owns one vector (see
    :func:`canonical_token`).  Pass ``mentions=None`` to train on raw text.
    """
    if len(corpus) == 0:
        raise SkipgramError("corpus is empty")
    sentences = training_sentences(corpus, mentions)
    emb = skipgram_train(
        sentences,
        dim=dim,
        window=window,
        negative_samples=negative_samples,
        epochs=epochs,
        learning_rate=learning_rate,
        seed=seed,
        min_count=min_count,
        sample=sample,
        provenance="word_context",
    )
    config = dict(emb.config, mention_resolved=mentions is not None)
    return EmbeddingMatrix(emb.entity_ids, emb.vectors, "word_context", config, emb.diagnostics)


def character_vectors(words: EmbeddingMatrix, canonical_ids: Iterable[str]) -> EmbeddingMatrix:
    """Re-key word vectors of canonical tokens by canonical id."""
    ids = list(canonical_ids)
    vectors = words.aligned([canonical_token(c) for c in ids])
    return EmbeddingMatrix(tuple(ids), vectors, "word_context", words.config, words.diagnostics)
