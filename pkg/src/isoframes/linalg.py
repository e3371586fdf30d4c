"""Dense linear algebra over a table-backed finite field.

Matrices are numpy int16 arrays of element codes; rows are vectors.
"""

from __future__ import annotations

import numpy as np

from .fields import FiniteField


def rref(field: FiniteField, M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns (R, pivot column list)."""
    R = np.array(M, dtype=np.int16, copy=True)
    if R.ndim != 2:
        R = R.reshape(1, -1)
    nrows, ncols = R.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        rows = np.nonzero(R[r:, c])[0]
        if rows.size == 0:
            continue
        i = r + int(rows[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        inv = field.invert(int(R[r, c]))
        R[r] = field.mul[inv, R[r]]
        others = np.nonzero(R[:, c])[0]
        for j in others:
            if j != r:
                R[j] = field.sub[R[j], field.mul[R[j, c], R[r]]]
        pivots.append(c)
        r += 1
    return R[: len(pivots)], pivots


def rank(field: FiniteField, M) -> int:
    return len(rref(field, M)[1])


def nullspace(field: FiniteField, M) -> np.ndarray:
    """Basis (rows) of the right kernel {x : M x = 0}."""
    M = np.asarray(M, dtype=np.int16)
    ncols = M.shape[1]
    R, pivots = rref(field, M)
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=np.int16)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, c in enumerate(pivots):
            basis[k, c] = field.neg[R[r, f]]
    return basis


def in_row_space(field: FiniteField, R, pivots, v) -> bool:
    """Whether v lies in the span of an rref basis R with the given pivots."""
    v = np.array(v, dtype=np.int16, copy=True)
    for r, c in enumerate(pivots):
        if v[c]:
            v = field.sub[v, field.mul[v[c], R[r]]]
    return not np.any(v)


def reduce_rows(field: FiniteField, R, pivots, V) -> np.ndarray:
    """Reduce each row of V against an rref basis; zero rows are dependent."""
    V = np.array(V, dtype=np.int16, copy=True)
    for r, c in enumerate(pivots):
        mask = V[:, c] != 0
        if np.any(mask):
            V[mask] = field.sub[V[mask], field.mul[V[mask, c][:, None], R[r][None, :]]]
    return V


def inverse(field: FiniteField, M) -> np.ndarray:
    M = np.asarray(M, dtype=np.int16)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    aug = np.concatenate([M, np.eye(n, dtype=np.int16)], axis=1)
    R, pivots = rref(field, aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return R[:, n:]


def left_inverse(field: FiniteField, M) -> np.ndarray:
    """Some X with X M = I_k for an n x k matrix of full column rank."""
    M = np.asarray(M, dtype=np.int16)
    n, k = M.shape
    MT = M.T
    _, piv = rref(field, MT)
    if len(piv) != k:
        raise ValueError("matrix has no left inverse (rank below column count)")
    # M^T restricted to its pivot columns is invertible, so padding that
    # inverse with zeros solves M^T X^T = I.
    XT = np.zeros((n, k), dtype=np.int16)
    XT[piv, :] = inverse(field, MT[:, piv])
    return XT.T
