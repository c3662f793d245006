"""Character co-occurrence edge lists (sentence and sliding-window strategies)."""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable

from .characters import MentionRecord
from .corpus import TokenizedCorpus

__all__ = [
    "EdgeList",
    "sentence_pair_counts",
    "sentence_cooccurrences",
    "window_cooccurrences",
    "read_edges_csv",
]


@dataclass(frozen=True)
class EdgeList:
    """Undirected weighted pairs with ``u < v``, sorted."""

    entries: tuple[tuple[str, str, int], ...]
    strategy: str = "sentence"
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen = set()
        for u, v, w in self.entries:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if w < 1:
                raise ValueError(f"non-positive weight on ({u!r}, {v!r})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate pair {key}")
            seen.add(key)

    @classmethod
    def from_counts(cls, counts: Counter, strategy: str, **params) -> "EdgeList":
        entries = tuple(sorted((u, v, int(w)) for (u, v), w in counts.items() if w > 0))
        return cls(entries, strategy, dict(params))

    def __len__(self) -> int:
        return len(self.entries)

    def as_dict(self) -> dict[tuple[str, str], int]:
        return {(u, v): w for u, v, w in self.entries}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["u", "v", "weight"])
        writer.writerows(self.entries)
        return buf.getvalue()


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def sentence_pair_counts(
    mentions: Iterable[MentionRecord], count_multiplicity: bool = False
) -> Counter:
    """Pair weights from sentence-level co-occurrence.

    By default each sentence adds 1 to every pair of distinct characters it
    names, however often each is repeated.  With ``count_multiplicity`` every
    pair of mention instances counts.
    """
    by_sentence: dict[int, Counter] = defaultdict(Counter)
    for m in mentions:
        by_sentence[m.sentence_index][m.canonical_id] += 1
    counts: Counter = Counter()
    for names in by_sentence.values():
        for a, b in combinations(sorted(names), 2):
            counts[(a, b)] += names[a] * names[b] if count_multiplicity else 1
    return counts


def sentence_cooccurrences(
    mentions: Iterable[MentionRecord],
    corpus: TokenizedCorpus | None = None,
    count_multiplicity: bool = False,
) -> EdgeList:
    """Edge list under the same-sentence strategy.

    Mentions inside dialogue are included.  ``corpus`` is accepted for
    interface symmetry with the window strategy and is not needed.
    """
    counts = sentence_pair_counts(mentions, count_multiplicity)
    return EdgeList.from_counts(counts, "sentence", count_multiplicity=count_multiplicity)


def window_cooccurrences(
    mentions: Iterable[MentionRecord], corpus: TokenizedCorpus, window_chars: int = 2000
) -> EdgeList:
    """Edge list from mention pairs at most ``window_chars`` apart in one chapter.

    Each qualifying pair of mention instances with different characters adds
    1 to that character pair.  Distance is measured between the character
    offsets of the mentions' first tokens.
    """
    if window_chars <= 0:
        raise ValueError("window_chars must be positive")
    by_chapter: dict[int, list[tuple[int, str]]] = defaultdict(list)
    for m in mentions:
        by_chapter[m.chapter_index].append((corpus.tokens[m.token_start].char_offset, m.canonical_id))
    counts: Counter = Counter()
    for items in by_chapter.values():
        items.sort()
        for i, (off_i, id_i) in enumerate(items):
            for off_j, id_j in items[i + 1 :]:
                if off_j - off_i > window_chars:
                    break
                if id_i != id_j:
                    counts[_pair(id_i, id_j)] += 1
    return EdgeList.from_counts(counts, "window", window_chars=window_chars)


def read_edges_csv(path: str | Path, strategy: str = "sentence") -> EdgeList:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(r["u"], r["v"], int(r["weight"])) for r in csv.DictReader(fh)]
    return EdgeList(tuple(sorted((*_pair(u, v), w) for u, v, w in rows)), strategy)
