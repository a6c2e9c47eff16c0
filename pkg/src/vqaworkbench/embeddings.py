"""Word-embedding table loading and mean-pooled answer vectors."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class EmbeddingFormatError(ValueError):
    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class EmptyAnswerError(ValueError):
    pass


class EmbeddingTable:
    """Immutable word -> vector map with a fixed dimensionality.

    Safe to share across threads after construction.
    """

    def __init__(self, vectors: dict[str, np.ndarray], dim: int, duplicates: int = 0):
        self.dim = int(dim)
        self._vectors = {w: np.asarray(v, dtype=np.float64) for w, v in vectors.items()}
        for w, v in self._vectors.items():
            if v.shape != (self.dim,):
                raise ValueError(f"vector for {w!r} has shape {v.shape}, expected ({self.dim},)")
        self.duplicates = duplicates

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def __getitem__(self, word: str) -> np.ndarray:
        return self._vectors[word]

    def __len__(self) -> int:
        return len(self._vectors)

    def get(self, word: str):
        return self._vectors.get(word)

    def words(self):
        return self._vectors.keys()


@dataclass(frozen=True)
class AnswerVector:
    """Mean-pooled answer embedding; oov_fraction is the share of words
    that had no table entry. All-OOV answers yield the zero vector."""

    vector: np.ndarray
    oov_fraction: float
    n_words: int
    n_oov: int


def load_embedding_table(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Read a GloVe-format text file: one "word f1 ... fd" per line.

    Duplicate words keep their first occurrence and are counted on the
    returned table. Rows whose arity disagrees with the first row raise
    EmbeddingFormatError with the line number.
    """
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = expected_dim
    duplicates = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2 or (len(parts) == 1 and not parts[0]):
                if not line.strip():
                    continue
                raise EmbeddingFormatError(path, lineno, "expected 'word f1 ... fd'")
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise EmbeddingFormatError(
                    path, lineno, f"expected {dim} floats, found {len(values)}"
                )
            if word in vectors:
                duplicates += 1
                continue
            try:
                vec = np.array([float(x) for x in values], dtype=np.float64)
            except ValueError as e:
                raise EmbeddingFormatError(path, lineno, f"bad float: {e}") from e
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(path, lineno, "non-finite component")
            vectors[word] = vec
    if dim is None:
        raise EmbeddingFormatError(path, 0, "empty embedding file and no expected_dim")
    return EmbeddingTable(vectors, dim, duplicates)


def embed_answer(table: EmbeddingTable, answer_text: str) -> AnswerVector:
    """Mean-pool the in-vocabulary word vectors of a (normalized) answer.

    OOV words are skipped; an all-OOV answer yields the zero vector with
    oov_fraction 1.0. Word order does not matter.
    """
    words = answer_text.split()
    if not words:
        raise EmptyAnswerError("cannot embed an empty answer")
    hits = [table[w] for w in words if w in table]
    n_oov = len(words) - len(hits)
    if hits:
        vector = np.mean(hits, axis=0)
    else:
        vector = np.zeros(table.dim, dtype=np.float64)
    return AnswerVector(
        vector=vector,
        oov_fraction=n_oov / len(words),
        n_words=len(words),
        n_oov=n_oov,
    )
