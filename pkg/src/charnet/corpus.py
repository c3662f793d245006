"""Text ingestion: tokens, sentences, chapters and dialogue spans.

The tokenizer is a small regular-expression splitter.  Words keep internal
apostrophes (``don't``) but possessive ``'s`` is split off so that
``Frodo's`` still yields a ``Frodo`` token.  Hyphens split words unless the
hyphenated form is registered as a protected token (the alias table
supplies these, e.g. ``Uruk-Hai``).

Sentences end at ``.``, ``!``, ``?`` or ``…`` unless the next token starts
with a lowercase letter (``"Run!" said Frodo.`` stays one sentence).
Closing quotes and brackets directly after a terminator belong to the
sentence they close.  Chapter headings and blank lines always end a
sentence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

__all__ = [
    "CorpusError",
    "RawDocument",
    "SegmentationConfig",
    "Token",
    "Chapter",
    "TokenizedCorpus",
    "tokenize",
    "load_corpus",
    "detect_dialogue_spans",
    "read_manifest",
]

DEFAULT_CHAPTER_PATTERN = r"^[ \t]*Chapter\b[^\n]*$"
DEFAULT_ABBREVIATIONS = frozenset(
    {"Mr.", "Mrs.", "Ms.", "Dr.", "St.", "Mt.", "Prof.", "Capt.", "Lt.", "Sr.", "Jr.", "Gen.", "Col."}
)
DEFAULT_QUOTE_CHARS = frozenset({'"', "“", "”"})

TERMINATORS = frozenset({".", "!", "?", "…"})
OPENING_QUOTES = frozenset({"“", "„", "«"})
CLOSING_QUOTES = frozenset({"”", "»"})
_CLOSERS = frozenset({")", "]", "’"}) | CLOSING_QUOTES
_PARAGRAPH_BREAK = re.compile(r"\n[ \t\r]*\n")


class CorpusError(ValueError):
    """Raised when a document cannot be ingested."""


@dataclass(frozen=True)
class RawDocument:
    work_id: str
    title: str
    text: str | bytes
    chapter_pattern: str | None = None


@dataclass(frozen=True)
class SegmentationConfig:
    chapter_pattern: str = DEFAULT_CHAPTER_PATTERN
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
    quote_chars: frozenset[str] = DEFAULT_QUOTE_CHARS
    protected_tokens: frozenset[str] = frozenset()


class Token(NamedTuple):
    surface: str
    char_offset: int
    work_id: str


class Chapter(NamedTuple):
    work_id: str
    start: int
    end: int
    label: str


@lru_cache(maxsize=32)
def _token_regex(protected: tuple[str, ...]) -> re.Pattern[str]:
    alternatives = []
    for p in sorted(protected, key=lambda s: (-len(s), s)):
        pre = r"(?<!\w)" if re.match(r"\w", p) else ""
        post = r"(?!\w)" if re.search(r"\w$", p) else ""
        alternatives.append(pre + re.escape(p) + post)
    alternatives += [
        r"['’]s\b",
        r"\w+(?:['’](?!s\b)\w+)*",
        r"[^\w\s]",
    ]
    return re.compile("|".join(alternatives))


def tokenize(text: str, protected: Iterable[str] = ()) -> list[tuple[str, int]]:
    """Split ``text`` into ``(surface, char_offset)`` pairs."""
    pattern = _token_regex(tuple(sorted(set(protected))))
    return [(m.group(), m.start()) for m in pattern.finditer(text)]


@dataclass(frozen=True)
class TokenizedCorpus:
    """Immutable token stream with its segmentation.

    All ranges are half-open ``(start, end)`` token indices into the global
    token sequence.
    """

    works: tuple[str, ...]
    titles: tuple[str, ...]
    tokens: tuple[Token, ...]
    sentences: tuple[tuple[int, int], ...]
    chapters: tuple[Chapter, ...]
    dialogue_spans: tuple[tuple[int, int], ...]
    _sentence_chapter: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        idx, mapping = 0, []
        for start, _ in self.sentences:
            while self.chapters[idx].end <= start:
                idx += 1
            mapping.append(idx)
        object.__setattr__(self, "_sentence_chapter", tuple(mapping))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def sentence_chapter(self, sentence_index: int) -> int:
        return self._sentence_chapter[sentence_index]

    def sentence_tokens(self, sentence_index: int) -> list[str]:
        start, end = self.sentences[sentence_index]
        return [t.surface for t in self.tokens[start:end]]

    def work_token_count(self, work_id: str) -> int:
        return sum(1 for t in self.tokens if t.work_id == work_id)

    def check_invariants(self) -> None:
        """Raise AssertionError if any segmentation invariant is violated."""
        pos = 0
        for start, end in self.sentences:
            assert start == pos and end > start, (start, end, pos)
            pos = end
        assert pos == len(self.tokens)
        pos = 0
        for ch in self.chapters:
            assert ch.start == pos and ch.end > ch.start
            pos = ch.end
        assert pos == len(self.tokens)
        for si, (start, end) in enumerate(self.sentences):
            ch = self.chapters[self.sentence_chapter(si)]
            assert ch.start <= start and end <= ch.end
        last_end = 0
        for start, end in self.dialogue_spans:
            assert last_end <= start < end
            last_end = end
            owners = {i for i, ch in enumerate(self.chapters) if ch.start <= start < ch.end}
            (owner,) = owners
            assert end <= self.chapters[owner].end
        for a, b in zip(self.tokens, self.tokens[1:]):
            if a.work_id == b.work_id:
                assert a.char_offset < b.char_offset

    def to_dict(self) -> dict:
        return {
            "works": list(self.works),
            "titles": list(self.titles),
            "tokens": [[t.surface, t.char_offset, t.work_id] for t in self.tokens],
            "sentences": [list(s) for s in self.sentences],
            "chapters": [[c.work_id, c.start, c.end, c.label] for c in self.chapters],
            "dialogue_spans": [list(s) for s in self.dialogue_spans],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "TokenizedCorpus":
        return cls(
            works=tuple(data["works"]),
            titles=tuple(data["titles"]),
            tokens=tuple(Token(s, int(o), w) for s, o, w in data["tokens"]),
            sentences=tuple((int(a), int(b)) for a, b in data["sentences"]),
            chapters=tuple(Chapter(w, int(a), int(b), lbl) for w, a, b, lbl in data["chapters"]),
            dialogue_spans=tuple((int(a), int(b)) for a, b in data["dialogue_spans"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "TokenizedCorpus":
        return cls.from_dict(json.loads(text))


def _decode(doc: RawDocument) -> str:
    if isinstance(doc.text, str):
        return doc.text
    try:
        return doc.text.decode("utf-8")
    except UnicodeDecodeError as err:
        raise CorpusError(
            f"work {doc.work_id!r}: invalid UTF-8 at byte offset {err.start}"
        ) from None


def _chapter_bounds(text: str, pattern: str) -> list[tuple[int, int, str]]:
    """Character spans ``(start, heading_end, label)`` for each chapter."""
    matches = list(re.finditer(pattern, text, flags=re.MULTILINE))
    if not matches:
        return [(0, 0, "")]
    bounds = []
    if text[: matches[0].start()].strip():
        bounds.append((0, 0, ""))
    for m in matches:
        bounds.append((m.start(), m.end(), m.group().strip()))
    return bounds


def _split_sentences(
    surfaces: Sequence[str],
    offsets: Sequence[int],
    text: str,
    heading_end: int,
) -> list[int]:
    """Return sentence end positions (exclusive, local indices) for one chapter."""
    n = len(surfaces)
    ends: list[int] = []
    in_quote = False
    i = 0
    while i < n:
        tok = surfaces[i]
        if tok == '"':
            in_quote = not in_quote
        cut = None
        if i + 1 < n and offsets[i] < heading_end <= offsets[i + 1]:
            cut = i + 1
        elif i + 1 < n and _PARAGRAPH_BREAK.search(text, offsets[i] + len(tok), offsets[i + 1]):
            cut = i + 1
        elif tok in TERMINATORS:
            j = i + 1
            while j < n:
                nxt = surfaces[j]
                if nxt in TERMINATORS or nxt in _CLOSERS:
                    j += 1
                elif nxt == '"' and in_quote:
                    in_quote = False
                    j += 1
                else:
                    break
            if j < n and surfaces[j][:1].islower():
                i = j
                continue
            cut = j
        if cut is not None and cut < n:
            ends.append(cut)
            i = cut
            continue
        i += 1
    ends.append(n)
    return ends


def _dialogue_spans_for(
    surfaces: Sequence[str], start: int, end: int, quote_chars: frozenset[str]
) -> list[tuple[int, int]]:
    openers = OPENING_QUOTES & quote_chars
    closers = CLOSING_QUOTES & quote_chars
    symmetric = quote_chars - OPENING_QUOTES - CLOSING_QUOTES
    spans = []
    open_at: int | None = None
    for k in range(start, end):
        tok = surfaces[k]
        if tok not in quote_chars:
            continue
        if open_at is None and (tok in openers or tok in symmetric):
            open_at = k
        elif open_at is not None and (tok in closers or tok in symmetric):
            if k > open_at + 1:
                spans.append((open_at + 1, k))
            open_at = None
    if open_at is not None and end > open_at + 1:
        spans.append((open_at + 1, end))
    return spans


def detect_dialogue_spans(
    corpus: TokenizedCorpus, quote_chars: Iterable[str] = DEFAULT_QUOTE_CHARS
) -> list[tuple[int, int]]:
    """Token ranges enclosed by balanced quote pairs, never crossing chapters.

    A quote still open at the end of a chapter is closed there.
    """
    quotes = frozenset(quote_chars)
    surfaces = corpus.surfaces
    spans: list[tuple[int, int]] = []
    for ch in corpus.chapters:
        spans.extend(_dialogue_spans_for(surfaces, ch.start, ch.end, quotes))
    return spans


def load_corpus(
    documents: Sequence[RawDocument], config: SegmentationConfig | None = None
) -> TokenizedCorpus:
    """Tokenize and segment ``documents`` into a single corpus, in input order."""
    config = config or SegmentationConfig()
    if not documents:
        raise CorpusError("at least one document is required")
    seen: set[str] = set()
    tokens: list[Token] = []
    sentences: list[tuple[int, int]] = []
    chapters: list[Chapter] = []
    dialogue: list[tuple[int, int]] = []
    for doc in documents:
        if not doc.work_id:
            raise CorpusError("work_id must be non-empty")
        if doc.work_id in seen:
            raise CorpusError(f"duplicate work_id {doc.work_id!r}")
        seen.add(doc.work_id)
        text = _decode(doc)
        pairs = tokenize(text, config.protected_tokens | config.abbreviations)
        if not pairs:
            raise CorpusError(f"work {doc.work_id!r}: document is empty")
        pattern = doc.chapter_pattern or config.chapter_pattern
        bounds = _chapter_bounds(text, pattern)
        char_starts = [b[0] for b in bounds[1:]] + [len(text) + 1]
        k = 0
        for (c_start, heading_end, label), c_next in zip(bounds, char_starts):
            local: list[tuple[str, int]] = []
            while k < len(pairs) and pairs[k][1] < c_next:
                local.append(pairs[k])
                k += 1
            if not local:
                continue
            base = len(tokens)
            surfaces = [s for s, _ in local]
            offsets = [o for _, o in local]
            tokens.extend(Token(s, o, doc.work_id) for s, o in local)
            prev = 0
            for cut in _split_sentences(surfaces, offsets, text, heading_end):
                sentences.append((base + prev, base + cut))
                prev = cut
            chapters.append(Chapter(doc.work_id, base, base + len(local), label))
            dialogue.extend(
                (base + a, base + b)
                for a, b in _dialogue_spans_for(surfaces, 0, len(local), config.quote_chars)
            )
    return TokenizedCorpus(
        works=tuple(d.work_id for d in documents),
        titles=tuple(d.title for d in documents),
        tokens=tuple(tokens),
        sentences=tuple(sentences),
        chapters=tuple(chapters),
        dialogue_spans=tuple(dialogue),
    )


def read_manifest(path: str | Path) -> list[RawDocument]:
    """Read a JSON corpus manifest.

    The manifest is a list (or ``{"documents": [...]}``) of objects with
    ``work_id``, ``title``, ``path`` and optionally ``chapter_delimiter``.
    Relative paths resolve against the manifest's directory.  Files are read
    as bytes so invalid UTF-8 is reported with its byte offset.
    """
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    entries = data["documents"] if isinstance(data, dict) else data
    docs = []
    for entry in entries:
        file_path = Path(entry["path"])
        if not file_path.is_absolute():
            file_path = path.parent / file_path
        docs.append(
            RawDocument(
                work_id=entry["work_id"],
                title=entry.get("title", entry["work_id"]),
                text=file_path.read_bytes(),
                chapter_pattern=entry.get("chapter_delimiter"),
            )
        )
    return docs
