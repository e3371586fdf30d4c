"""Hyperbolic eps-hermitian spaces: form evaluation, isotropy, complements.

The form on the standard basis e_1..e_{2n} pairs e_{2i-1} with e_{2i}:

    h(x, y) = sum_i  x_{2i-1} conj(y_{2i}) + eps x_{2i} conj(y_{2i-1})

so h(e_{2i-1}, e_{2i}) = 1 and h(e_{2i}, e_{2i-1}) = eps, it is linear in the
first slot, conjugate-linear in the second, and h(y, x) = eps conj(h(x, y)).
"""

from __future__ import annotations

import itertools

import numpy as np

from . import linalg
from .fields import ConfigurationError, FiniteField, FormParams


class UnsupportedConvention(ValueError):
    """Raised where the even-characteristic quadratic refinement would be needed."""


class HyperbolicSpace:
    """R^{2n} with the standard hyperbolic form for a given eps."""

    def __init__(self, field: FiniteField, rank: int, eps: int = -1):
        if rank < 1:
            raise ConfigurationError("rank must be at least 1")
        self.field = field
        self.rank = rank
        self.dim = 2 * rank
        if eps == -1:
            eps = field.minus_one
        eps = int(eps)
        if not (0 <= eps < field.q):
            raise ConfigurationError(f"eps code {eps} outside the field")
        if int(field.mul[eps, field.conj[eps]]) != 1:
            raise ConfigurationError("eps must satisfy eps * conj(eps) = 1")
        self.eps = eps
        self.form = FormParams.make(field, eps)
        gram = np.zeros((self.dim, self.dim), dtype=np.int16)
        for i in range(rank):
            gram[2 * i, 2 * i + 1] = 1
            gram[2 * i + 1, 2 * i] = eps
        self.gram = gram

    def __repr__(self):
        return (
            f"HyperbolicSpace(q={self.field.q}, n={self.rank}, eps={self.eps}, "
            f"involution={self.field.involution!r})"
        )

    def basis_vector(self, i: int) -> tuple:
        """e_i, 1-indexed."""
        v = [0] * self.dim
        v[i - 1] = 1
        return tuple(v)

    def _check_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int16)
        if v.shape != (self.dim,):
            raise ValueError(f"vector of length {v.shape} in a {self.dim}-dim space")
        return v

    def h(self, v, w) -> int:
        """Form value h(v, w)."""
        v = self._check_vector(v)
        w = self._check_vector(w)
        F = self.field
        row = F.matmul(v.reshape(1, -1), self.gram)
        return int(F.matmul(row, F.conj[w].reshape(-1, 1))[0, 0])

    def h_matrix(self, V, W) -> np.ndarray:
        """Pairwise values h(V[i], W[j]) for stacks of row vectors."""
        F = self.field
        V = np.asarray(V, dtype=np.int16).reshape(-1, self.dim)
        W = np.asarray(W, dtype=np.int16).reshape(-1, self.dim)
        return F.matmul(F.matmul(V, self.gram), F.conj[W].T)

    def _require_odd_characteristic(self):
        if self.field.p == 2:
            raise UnsupportedConvention(
                "isotropy in characteristic 2 needs a quadratic refinement "
                "that this implementation does not provide"
            )

    def is_isotropic_vector(self, v) -> bool:
        self._require_odd_characteristic()
        return self.h(v, v) == 0

    def is_isotropic_frame(self, frame) -> bool:
        """Whether an independent sequence spans a totally isotropic subspace."""
        self._require_odd_characteristic()
        V = np.asarray(list(frame), dtype=np.int16).reshape(-1, self.dim)
        if linalg.rank(self.field, V) != V.shape[0]:
            raise ValueError("frame is not unimodular (components are dependent)")
        return not np.any(self.h_matrix(V, V))

    def perp(self, vectors) -> np.ndarray:
        """Basis (rows) of {x : h(x, v) = 0 for every input v}."""
        F = self.field
        vecs = list(vectors)
        if not vecs:
            return np.eye(self.dim, dtype=np.int16)
        V = np.asarray(vecs, dtype=np.int16).reshape(-1, self.dim)
        # h(x, v) = 0 is the linear condition (gram . conj(v))^T x = 0.
        A = F.matmul(self.gram, F.conj[V].T).T
        return linalg.nullspace(F, A)

    def all_vectors(self) -> np.ndarray:
        """Every vector of the space in canonical (lexicographic) order."""
        q, d = self.field.q, self.dim
        if q**d > 40_000_000:
            raise MemoryError("vector enumeration over this space is too large")
        grids = np.meshgrid(*[np.arange(q, dtype=np.int16)] * d, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def form_values_diag(self, V) -> np.ndarray:
        """h(v, v) for every row v of V."""
        F = self.field
        V = np.asarray(V, dtype=np.int16).reshape(-1, self.dim)
        M = F.matmul(V, self.gram)
        terms = F.mul[M, F.conj[V]]
        acc = terms[:, 0]
        for j in range(1, self.dim):
            acc = F.add[acc, terms[:, j]]
        return acc

    def isotropic_vectors(self) -> np.ndarray:
        """All nonzero isotropic vectors, canonical order."""
        self._require_odd_characteristic()
        V = self.all_vectors()[1:]
        return V[self.form_values_diag(V) == 0]


def line_representative(field: FiniteField, v) -> tuple:
    """Normalize a nonzero vector so its first nonzero coordinate is 1."""
    v = np.asarray(v, dtype=np.int16)
    nz = np.nonzero(v)[0]
    if nz.size == 0:
        raise ValueError("zero vector spans no line")
    c = field.invert(int(v[nz[0]]))
    return tuple(int(x) for x in field.mul[c, v])
