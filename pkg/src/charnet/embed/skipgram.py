"""Skip-gram with negative sampling, trained by minibatch SGD in numpy.

Follows the word2vec recipe: per-position window shrinking, negatives drawn
from the unigram distribution raised to 3/4, optional frequent-token
subsampling and a learning rate decaying linearly to ``1e-4 * lr``.
Updates are applied in small minibatches of shuffled (center, context)
pairs rather than one pair at a time.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from .matrix import EmbeddingMatrix


class SkipgramError(ValueError):
    pass


def build_vocab(sequences: Sequence[Sequence[str]], min_count: int) -> tuple[list[str], np.ndarray]:
    """Tokens with at least ``min_count`` occurrences, most frequent first."""
    counts = Counter(tok for seq in sequences for tok in seq)
    vocab = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    return vocab, np.array([counts[t] for t in vocab], dtype=np.float64)


def _pairs(ids: np.ndarray, seq: np.ndarray, reach: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    centers, contexts = [], []
    for off in range(1, window + 1):
        if off >= len(ids):
            break
        same = seq[:-off] == seq[off:]
        fwd = same & (reach[:-off] >= off)
        bwd = same & (reach[off:] >= off)
        centers += [ids[:-off][fwd], ids[off:][bwd]]
        contexts += [ids[off:][fwd], ids[:-off][bwd]]
    if not centers:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def _scatter_add(target: np.ndarray, idx: np.ndarray, rows: np.ndarray) -> None:
    """``target[idx] += rows`` with repeated indices summed (faster than ``np.add.at``)."""
    order = np.argsort(idx, kind="stable")
    idx = idx[order]
    starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
    target[idx[starts]] += np.add.reduceat(rows[order], starts, axis=0)


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def skipgram_train(
    sequences: Sequence[Sequence[str]],
    dim: int = 100,
    window: int = 5,
    negative_samples: int = 5,
    epochs: int = 5,
    learning_rate: float = 0.025,
    seed: int = 0,
    min_count: int = 1,
    sample: float = 0.0,
    batch_size: int = 128,
    provenance: str = "word_context",
) -> EmbeddingMatrix:
    """Train skip-gram vectors; ``diagnostics["epoch_loss"]`` holds mean loss per epoch."""
    if not sequences or dim < 1:
        raise SkipgramError("need at least one sequence and dim >= 1")
    vocab, freq = build_vocab(sequences, min_count)
    if not vocab:
        raise SkipgramError(f"vocabulary is empty after min_count={min_count}")
    if len(vocab) < 2:
        raise SkipgramError(f"vocabulary has a single token {vocab[0]!r}; no informative pairs")
    index = {t: i for i, t in enumerate(vocab)}
    ids_list, seq_list = [], []
    for s, seq in enumerate(sequences):
        kept = [index[t] for t in seq if t in index]
        ids_list.extend(kept)
        seq_list.extend([s] * len(kept))
    all_ids = np.array(ids_list, dtype=np.int64)
    all_seq = np.array(seq_list, dtype=np.int64)

    rng = np.random.default_rng(seed)
    V = len(vocab)
    w_in = (rng.random((V, dim)) - 0.5) / dim
    w_out = np.zeros((V, dim))
    noise_cdf = np.cumsum(freq**0.75)
    noise_cdf /= noise_cdf[-1]
    if sample > 0:
        f = freq / freq.sum()
        keep_prob = np.minimum(1.0, (np.sqrt(f / sample) + 1.0) * sample / f)
    else:
        keep_prob = np.ones(V)

    epoch_pairs = []
    losses = []
    total_planned = None
    seen = 0
    for epoch in range(epochs):
        keep = rng.random(len(all_ids)) < keep_prob[all_ids]
        ids, seq = all_ids[keep], all_seq[keep]
        reach = rng.integers(1, window + 1, size=len(ids))
        centers, contexts = _pairs(ids, seq, reach, window)
        if len(centers) == 0:
            raise SkipgramError("no (center, context) pairs; sequences too short")
        order = rng.permutation(len(centers))
        centers, contexts = centers[order], contexts[order]
        if total_planned is None:
            total_planned = len(centers) * epochs
        epoch_pairs.append(len(centers))
        loss_sum = 0.0
        for start in range(0, len(centers), batch_size):
            c = centers[start : start + batch_size]
            o = contexts[start : start + batch_size]
            b = len(c)
            neg = np.searchsorted(noise_cdf, rng.random((b, negative_samples)), side="right")
            neg = np.minimum(neg, V - 1)
            lr = learning_rate * max(1e-4, 1.0 - seen / total_planned)
            seen += b
            u = w_in[c]
            v = w_out[o]
            vn = w_out[neg]
            pos_score = np.einsum("bd,bd->b", u, v)
            neg_score = np.einsum("bkd,bd->bk", vn, u)
            loss_sum -= _log_sigmoid(pos_score).sum() + _log_sigmoid(-neg_score).sum()
            g_pos = 0.5 * (1.0 + np.tanh(0.5 * pos_score)) - 1.0
            g_neg = 0.5 * (1.0 + np.tanh(0.5 * neg_score))
            grad_u = g_pos[:, None] * v + np.einsum("bk,bkd->bd", g_neg, vn)
            _scatter_add(w_out, o, -lr * g_pos[:, None] * u)
            _scatter_add(w_out, neg.ravel(), (-lr * g_neg[..., None] * u[:, None, :]).reshape(-1, dim))
            _scatter_add(w_in, c, -lr * grad_u)
        losses.append(loss_sum / len(centers))

    return EmbeddingMatrix(
        entity_ids=tuple(vocab),
        vectors=w_in,
        provenance=provenance,
        config={
            "dim": dim,
            "window": window,
            "negative_samples": negative_samples,
            "epochs": epochs,
            "learning_rate": learning_rate,
            "seed": seed,
            "min_count": min_count,
            "sample": sample,
            "batch_size": batch_size,
        },
        diagnostics={"epoch_loss": losses, "epoch_pairs": epoch_pairs},
    )
