"""Word-embedding store for donor selection by cosine similarity."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np


@dataclass
class EmbeddingStore:
    """L2-normalized word vectors; cosine similarity is a plain dot product."""

    dimension: int
    vectors: dict[str, np.ndarray]

    @classmethod
    def from_vectors(cls, vectors: Mapping[str, np.ndarray]) -> "EmbeddingStore":
        if not vectors:
            raise ValueError("embedding store must be nonempty")
        dim = None
        normalized: dict[str, np.ndarray] = {}
        for word, vec in vectors.items():
            v = np.asarray(vec, dtype=np.float64)
            if v.ndim != 1:
                raise ValueError(f"vector for {word!r} is not 1-dimensional")
            if dim is None:
                dim = v.shape[0]
            elif v.shape[0] != dim:
                raise ValueError(f"vector for {word!r} has dimension {v.shape[0]}, expected {dim}")
            norm = float(np.linalg.norm(v))
            if norm == 0.0 or not np.isfinite(norm):
                raise ValueError(f"vector for {word!r} has invalid norm {norm}")
            normalized[word] = v / norm
        assert dim is not None
        return cls(dim, normalized)

    @classmethod
    def from_word2vec_text(cls, path: str | Path) -> "EmbeddingStore":
        """Parse the text format: header ``<count> <dim>``, then one
        ``<word> <v1> ... <vdim>`` line per word."""
        vectors: dict[str, np.ndarray] = {}
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise ValueError("embedding file must start with '<count> <dim>'")
            count, dim = int(header[0]), int(header[1])
            for line_no, line in enumerate(fh, start=2):
                parts = line.rstrip("\n").split(" ")
                if len(parts) != dim + 1:
                    raise ValueError(f"line {line_no}: expected {dim} components")
                word = parts[0]
                if word in vectors:
                    raise ValueError(f"line {line_no}: duplicate word {word!r}")
                vectors[word] = np.array([float(x) for x in parts[1:]])
        if len(vectors) != count:
            raise ValueError(f"header declares {count} words but file has {len(vectors)}")
        return cls.from_vectors(vectors)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def words(self) -> list[str]:
        return sorted(self.vectors)

    def similarity(self, a: str, b: str) -> float:
        return float(self.vectors[a] @ self.vectors[b])

    def similarities(self, word: str, candidates: Iterable[str]) -> dict[str, float]:
        v = self.vectors[word]
        return {c: float(self.vectors[c] @ v) for c in candidates}


def write_word2vec_text(store: EmbeddingStore, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(store.vectors)} {store.dimension}\n")
        for word in sorted(store.vectors):
            comps = " ".join(repr(float(x)) for x in store.vectors[word])
            fh.write(f"{word} {comps}\n")
