"""Embedding tables: pretrained loading, lookup and sparse gradients."""

from dataclasses import dataclass, field

import numpy as np

from .numeric import DTYPE


class EmbeddingFormatError(ValueError):
    pass


def random_rows(rng, n, dim):
    """Uniform init in [-0.5/dim, 0.5/dim]."""
    bound = 0.5 / dim
    return rng.uniform(-bound, bound, size=(n, dim))


class SparseGrad:
    """Row-indexed gradient for an embedding matrix."""

    def __init__(self, dim):
        self.dim = dim
        self.rows = {}

    def add(self, idx, g):
        idx = int(idx)
        cur = self.rows.get(idx)
        if cur is None:
            self.rows[idx] = np.array(g, dtype=DTYPE)
        else:
            cur += g

    def add_many(self, ids, G):
        for i, g in zip(ids, G):
            self.add(i, g)

    def merge(self, other):
        for i, g in other.rows.items():
            self.add(i, g)

    def items(self):
        """Sorted (row ids, gradient block) pair."""
        ids = sorted(self.rows)
        if not ids:
            return np.zeros(0, dtype=np.intp), np.zeros((0, self.dim))
        return np.array(ids, dtype=np.intp), np.stack([self.rows[i] for i in ids])

    def to_dense(self, n_rows):
        out = np.zeros((n_rows, self.dim))
        for i, g in self.rows.items():
            out[i] += g
        return out

    def __len__(self):
        return len(self.rows)


@dataclass
class EmbeddingTable:
    matrix: np.ndarray
    trainable: bool = True
    coverage: float = 0.0
    hits: int = 0
    grad: SparseGrad = field(init=False, repr=False)

    def __post_init__(self):
        self.grad = SparseGrad(self.dim)

    @property
    def dim(self):
        return self.matrix.shape[1]

    def lookup(self, idx):
        if not 0 <= idx < self.matrix.shape[0]:
            raise IndexError(f"embedding row {idx} out of range")
        return self.matrix[idx]

    def accumulate_grad(self, idx, g):
        if not 0 <= idx < self.matrix.shape[0]:
            raise IndexError(f"embedding row {idx} out of range")
        self.grad.add(idx, g)

    def zero_grad(self):
        self.grad = SparseGrad(self.dim)


def read_embeddings(path, encoding="utf-8"):
    """Parse ``word v1 ... vd`` lines into a dict of float64 vectors."""
    vectors = {}
    dim = None
    with open(path, encoding=encoding) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip().split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise EmbeddingFormatError(f"{path}:{lineno}: no vector values")
            elif len(values) != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} values, found {len(values)}")
            try:
                vectors[word] = np.array(values, dtype=DTYPE)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric value") from None
    return vectors


def read_embedding_pair(words_path, matrix_path, encoding="utf-8"):
    """Two-file variant: a word list and a whitespace matrix, row i for word i."""
    with open(words_path, encoding=encoding) as fh:
        words = [ln.strip() for ln in fh if ln.strip()]
    rows = []
    with open(matrix_path, encoding=encoding) as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    rows.append(np.array(line.split(), dtype=DTYPE))
                except ValueError:
                    raise EmbeddingFormatError(f"{matrix_path}:{lineno}: non-numeric value") from None
    if len(rows) != len(words):
        raise EmbeddingFormatError(
            f"{len(words)} words but {len(rows)} matrix rows")
    if rows and len({len(r) for r in rows}) != 1:
        raise EmbeddingFormatError(f"{matrix_path}: inconsistent row widths")
    return dict(zip(words, rows))


def vectors_dim(vectors, default=None):
    for v in vectors.values():
        return len(v)
    return default


def table_from_vectors(vectors, words, rng, dim=None, trainable=True):
    """Build a table over ``words`` (an :class:`Index`), copying known vectors.

    A vocabulary entry missing from ``vectors`` falls back to its lowercase
    form before random initialization.
    """
    dim = vectors_dim(vectors, dim)
    if dim is None:
        raise EmbeddingFormatError("embedding dimension unknown for an empty file")
    matrix = random_rows(rng, len(words), dim)
    hits = 0
    for i, w in enumerate(words.itos):
        if i < words.n_reserved:
            continue
        v = vectors.get(w)
        if v is None:
            v = vectors.get(w.lower())
        if v is not None:
            matrix[i] = v
            hits += 1
    n_real = len(words) - words.n_reserved
    coverage = hits / n_real if n_real else 0.0
    return EmbeddingTable(matrix, trainable=trainable, coverage=coverage, hits=hits)


def load_pretrained(path, vocab, rng=None, dim=50, trainable=True):
    """Load a text embedding file into a table aligned with ``vocab.words``.

    ``dim`` only matters for an empty file.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    vectors = read_embeddings(path)
    return table_from_vectors(vectors, vocab.words, rng, dim=dim, trainable=trainable)
