"""Named-reference resolution, mention statistics and narrative charts."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import SegmentationConfig, TokenizedCorpus, tokenize

__all__ = [
    "AliasError",
    "AliasTable",
    "MentionRecord",
    "WorkStats",
    "NarrativeChart",
    "DEFAULT_PRONOUNS",
    "compile_alias_table",
    "read_alias_table",
    "extract_mentions",
    "count_mention_types",
    "mention_counts_by_work",
    "narrative_chart",
    "write_mentions_csv",
    "read_mentions_csv",
]

DEFAULT_PRONOUNS = frozenset(
    """
    i me my mine myself we us our ours ourselves you your yours yourself
    yourselves he him his himself she her hers herself it its itself they
    them their theirs themselves thee thou thy thine ye
    """.split()
)


class AliasError(ValueError):
    pass


@dataclass(frozen=True)
class AliasTable:
    """Mapping from alias token sequences to canonical character ids."""

    entries: tuple[tuple[tuple[str, ...], str], ...]
    protected_tokens: frozenset[str] = frozenset()
    _lookup: dict = field(default_factory=dict, repr=False, compare=False)
    _max_len: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        for alias, canonical in self.entries:
            self._lookup[alias] = canonical
            self._max_len[alias[0]] = max(self._max_len.get(alias[0], 0), len(alias))

    @property
    def canonical_ids(self) -> frozenset[str]:
        return frozenset(c for _, c in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def resolve(self, alias: str | Sequence[str]) -> str | None:
        if isinstance(alias, str):
            alias = tuple(s for s, _ in tokenize(alias, self.protected_tokens))
        return self._lookup.get(tuple(alias))

    def is_alias(self, tokens: Sequence[str]) -> bool:
        return tuple(tokens) in self._lookup

    def match_at(self, surfaces: Sequence[str], i: int, end: int) -> tuple[int, str] | None:
        """Longest alias starting at ``surfaces[i]`` and ending before ``end``."""
        longest = self._max_len.get(surfaces[i], 0)
        for length in range(min(longest, end - i), 0, -1):
            canonical = self._lookup.get(tuple(surfaces[i : i + length]))
            if canonical is not None:
                return length, canonical
        return None

    def segmentation_config(self, base: SegmentationConfig | None = None) -> SegmentationConfig:
        """Corpus segmentation config whose tokenizer agrees with this table."""
        base = base or SegmentationConfig()
        return replace(base, protected_tokens=base.protected_tokens | self.protected_tokens)


def _protected_pieces(text: str) -> set[str]:
    # whitespace-separated pieces that the plain tokenizer would split, e.g. "Uruk-Hai"
    pieces = set()
    for piece in text.split():
        toks = tokenize(piece)
        if len(toks) > 1 and not (len(toks) == 2 and toks[1][0] in {"'s", "’s"}):
            if any(ch.isalnum() for ch in piece[-1:]):
                pieces.add(piece)
    return pieces


def compile_alias_table(
    raw_entries: Iterable[tuple[str, str]], config: SegmentationConfig | None = None
) -> AliasTable:
    """Tokenize aliases and register each canonical name as its own alias.

    Raises AliasError for an empty table or an alias claimed by two
    different canonical ids.
    """
    raw = [(a.strip(), c.strip()) for a, c in raw_entries]
    if not raw:
        raise AliasError("alias table is empty")
    config = config or SegmentationConfig()
    protected: set[str] = set()
    for alias, canonical in raw:
        protected |= _protected_pieces(alias) | _protected_pieces(canonical)
    tok_protected = frozenset(protected) | config.protected_tokens | config.abbreviations

    resolved: dict[tuple[str, ...], tuple[str, str]] = {}

    def add(alias_text: str, canonical: str) -> None:
        toks = tuple(s for s, _ in tokenize(alias_text, tok_protected))
        if not toks:
            raise AliasError(f"alias {alias_text!r} has no tokens")
        prev = resolved.get(toks)
        if prev is not None and prev[1] != canonical:
            raise AliasError(
                f"alias {alias_text!r} maps to both {prev[1]!r} (from {prev[0]!r}) and {canonical!r}"
            )
        resolved[toks] = (alias_text, canonical)

    for alias, canonical in raw:
        if not canonical:
            raise AliasError(f"alias {alias!r} has an empty canonical id")
        add(alias, canonical)
    for canonical in sorted({c for _, c in raw}):
        add(canonical, canonical)
    entries = tuple(sorted((toks, c) for toks, (_, c) in resolved.items()))
    return AliasTable(entries=entries, protected_tokens=frozenset(protected))


def read_alias_table(path: str | Path, config: SegmentationConfig | None = None) -> AliasTable:
    """Load a TSV (``alias<TAB>canonical``) or JSON alias file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        pairs = list(data.items()) if isinstance(data, dict) else [tuple(p) for p in data]
    else:
        pairs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise AliasError(f"{path}:{lineno}: expected 2 tab-separated columns")
            pairs.append((cols[0], cols[1]))
    return compile_alias_table(pairs, config)


@dataclass(frozen=True, order=True)
class MentionRecord:
    token_start: int
    token_end: int
    canonical_id: str
    work_id: str
    sentence_index: int
    chapter_index: int
    in_dialogue: bool

    @property
    def token_range(self) -> tuple[int, int]:
        return (self.token_start, self.token_end)


def _dialogue_mask(corpus: TokenizedCorpus) -> np.ndarray:
    mask = np.zeros(len(corpus), dtype=bool)
    for start, end in corpus.dialogue_spans:
        mask[start:end] = True
    return mask


def extract_mentions(corpus: TokenizedCorpus, aliases: AliasTable) -> list[MentionRecord]:
    """Left-to-right, longest-match-first alias scan within each sentence."""
    surfaces = corpus.surfaces
    in_dialogue = _dialogue_mask(corpus)
    out = []
    for si, (start, end) in enumerate(corpus.sentences):
        chapter = corpus.sentence_chapter(si)
        i = start
        while i < end:
            hit = aliases.match_at(surfaces, i, end)
            if hit is None:
                i += 1
                continue
            length, canonical = hit
            out.append(
                MentionRecord(
                    token_start=i,
                    token_end=i + length,
                    canonical_id=canonical,
                    work_id=corpus.tokens[i].work_id,
                    sentence_index=si,
                    chapter_index=chapter,
                    in_dialogue=bool(in_dialogue[i]),
                )
            )
            i += length
    return out


@dataclass(frozen=True)
class WorkStats:
    token_count: int
    explicit_named_mentions: int
    pronoun_token_count: int
    cooccurrence_count: int
    nominal_mention_count: int | None = None

    def to_dict(self) -> dict:
        d = {
            "token_count": self.token_count,
            "explicit_named_mentions": self.explicit_named_mentions,
            "pronoun_token_count": self.pronoun_token_count,
            "cooccurrence_count": self.cooccurrence_count,
        }
        if self.nominal_mention_count is not None:
            d["nominal_mention_count"] = self.nominal_mention_count
        return d


def _count_sequences(surfaces: Sequence[str], start: int, end: int, lexicon: set[tuple[str, ...]]) -> int:
    if not lexicon:
        return 0
    longest = max(len(s) for s in lexicon)
    count, i = 0, start
    while i < end:
        for length in range(min(longest, end - i), 0, -1):
            if tuple(s.lower() for s in surfaces[i : i + length]) in lexicon:
                count += 1
                i += length
                break
        else:
            i += 1
    return count


def count_mention_types(
    corpus: TokenizedCorpus,
    aliases: AliasTable,
    pronoun_lexicon: Iterable[str] = DEFAULT_PRONOUNS,
    nominal_lexicon: Iterable[str] | None = None,
) -> dict[str, WorkStats]:
    """Per-work token, named-mention, pronoun and co-occurrence counts.

    Pronouns are matched case-insensitively token by token.  Nominal phrases
    (``"the hobbit"``) are counted only if a lexicon is given, and are not
    attributed to any character.
    """
    from .cooccur import sentence_pair_counts

    pronouns = {p.lower() for p in pronoun_lexicon}
    if not pronouns:
        raise ValueError("pronoun lexicon must be non-empty")
    nominal = None
    if nominal_lexicon is not None:
        nominal = {
            tuple(s.lower() for s, _ in tokenize(phrase, aliases.protected_tokens))
            for phrase in nominal_lexicon
        }
        nominal.discard(())
    mentions = extract_mentions(corpus, aliases)
    surfaces = corpus.surfaces
    stats = {}
    for work in corpus.works:
        chapters = [ch for ch in corpus.chapters if ch.work_id == work]
        work_mentions = [m for m in mentions if m.work_id == work]
        n_tokens = sum(ch.end - ch.start for ch in chapters)
        n_pron = sum(
            1 for ch in chapters for s in surfaces[ch.start : ch.end] if s.lower() in pronouns
        )
        n_nominal = None
        if nominal is not None:
            # sentence-bounded so phrases never straddle a sentence break
            n_nominal = sum(
                _count_sequences(surfaces, a, b, nominal)
                for a, b in corpus.sentences
                if corpus.tokens[a].work_id == work
            )
        pairs = sentence_pair_counts(work_mentions)
        stats[work] = WorkStats(
            token_count=n_tokens,
            explicit_named_mentions=len(work_mentions),
            pronoun_token_count=n_pron,
            cooccurrence_count=sum(pairs.values()),
            nominal_mention_count=n_nominal,
        )
    return stats


def mention_counts_by_work(mentions: Iterable[MentionRecord]) -> dict[str, dict[str, int]]:
    """``{canonical_id: {work_id: count}}`` over all mentions."""
    counts: dict[str, Counter] = defaultdict(Counter)
    for m in mentions:
        counts[m.canonical_id][m.work_id] += 1
    return {c: dict(sorted(w.items())) for c, w in sorted(counts.items())}


@dataclass(frozen=True)
class NarrativeChart:
    characters: tuple[str, ...]
    chapters: tuple[str, ...]
    matrix: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["character", *self.chapters])
        for name, row in zip(self.characters, self.matrix):
            writer.writerow([name, *(repr(float(x)) for x in row)])
        return buf.getvalue()


def narrative_chart(
    mentions: Iterable[MentionRecord],
    key_characters: Sequence[str],
    corpus: TokenizedCorpus,
    known_ids: Iterable[str] | None = None,
    work_id: str | None = None,
) -> NarrativeChart:
    """Share of each key character among non-dialogue key-character mentions, per chapter.

    Columns whose key characters are never mentioned outside dialogue are
    all zero; every other column sums to one.
    """
    mentions = list(mentions)
    if not key_characters:
        raise ValueError("key_characters must be non-empty")
    known = set(known_ids) if known_ids is not None else {m.canonical_id for m in mentions}
    for c in key_characters:
        if c not in known:
            raise KeyError(f"unknown canonical id {c!r}")
    chapter_idx = [i for i, ch in enumerate(corpus.chapters) if work_id is None or ch.work_id == work_id]
    col_of = {ci: k for k, ci in enumerate(chapter_idx)}
    row_of = {c: r for r, c in enumerate(key_characters)}
    counts = np.zeros((len(key_characters), len(chapter_idx)), dtype=np.int64)
    for m in mentions:
        if m.in_dialogue or m.canonical_id not in row_of or m.chapter_index not in col_of:
            continue
        counts[row_of[m.canonical_id], col_of[m.chapter_index]] += 1
    totals = counts.sum(axis=0)
    matrix = np.zeros(counts.shape)
    for col in np.flatnonzero(totals):
        matrix[:, col] = [float(Fraction(int(x), int(totals[col]))) for x in counts[:, col]]
    per_work: Counter = Counter()
    labels = []
    for ci in chapter_idx:
        ch = corpus.chapters[ci]
        per_work[ch.work_id] += 1
        labels.append(f"{ch.work_id}:{ch.label or per_work[ch.work_id]}")
    return NarrativeChart(tuple(key_characters), tuple(labels), matrix)


_MENTION_COLUMNS = ["canonical_id", "work_id", "chapter", "sentence", "token_start", "token_end", "in_dialogue"]


def write_mentions_csv(mentions: Iterable[MentionRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_MENTION_COLUMNS)
        for m in mentions:
            writer.writerow(
                [m.canonical_id, m.work_id, m.chapter_index, m.sentence_index,
                 m.token_start, m.token_end, "true" if m.in_dialogue else "false"]
            )


def read_mentions_csv(path: str | Path) -> list[MentionRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            MentionRecord(
                token_start=int(row["token_start"]),
                token_end=int(row["token_end"]),
                canonical_id=row["canonical_id"],
                work_id=row["work_id"],
                sentence_index=int(row["sentence"]),
                chapter_index=int(row["chapter"]),
                in_dialogue=row["in_dialogue"] == "true",
            )
            for row in csv.DictReader(fh)
        ]
