from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

PROVENANCES = ("word_context", "node2vec", "laplacian_eigenmap", "gnn_hidden", "random")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row ``i`` of ``vectors`` is the latent vector of ``entity_ids[i]``."""

    entity_ids: tuple[str, ...]
    vectors: np.ndarray
    provenance: str
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=np.float64)
        object.__setattr__(self, "vectors", vectors)
        if vectors.ndim != 2 or vectors.shape[0] != len(self.entity_ids) or vectors.shape[1] < 1:
            raise ValueError(f"bad embedding shape {vectors.shape} for {len(self.entity_ids)} entities")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding contains non-finite values")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.entity_ids)

    def __contains__(self, entity: str) -> bool:
        return entity in self._row_index()

    def _row_index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.entity_ids)}

    def vector(self, entity: str) -> np.ndarray:
        return self.vectors[self._row_index()[entity]]

    def aligned(self, entities: Sequence[str]) -> np.ndarray:
        """Rows for ``entities`` in that order; KeyError names the first missing one."""
        index = self._row_index()
        missing = [e for e in entities if e not in index]
        if missing:
            raise KeyError(f"no vector for {missing[0]!r}")
        return self.vectors[[index[e] for e in entities]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["entity_id", *(f"v_{i + 1}" for i in range(self.dim))])
        for entity, row in zip(self.entity_ids, self.vectors):
            writer.writerow([entity, *(repr(float(x)) for x in row)])
        return buf.getvalue()

    def sidecar(self) -> dict:
        return {
            "provenance": self.provenance,
            "dim": self.dim,
            "entities": len(self),
            "config": self.config,
            "diagnostics": self.diagnostics,
        }

    def save(self, path: str | Path) -> None:
        """Write ``path`` (CSV) and ``path`` + ``.json`` (metadata)."""
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        Path(f"{path}.json").write_text(
            json.dumps(self.sidecar(), indent=2, sort_keys=True, default=_jsonable), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingMatrix":
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))[1:]
        meta_path = Path(f"{path}.json")
        meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
        return cls(
            entity_ids=tuple(r[0] for r in rows),
            vectors=np.array([[float(x) for x in r[1:]] for r in rows]),
            provenance=meta.get("provenance", "word_context"),
            config=meta.get("config", {}),
            diagnostics=meta.get("diagnostics", {}),
        )


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")
