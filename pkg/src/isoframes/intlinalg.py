"""Exact linear algebra for integer boundary matrices.

Three engines, chosen by size:

  * dense Smith normal form over Z (invariant factors + rank),
  * dense Gaussian rank over F_p,
  * a streamed sparse eliminator over F_p for matrices far too large to
    densify: columns arrive one at a time, stored pivot columns are never
    touched again, and reduction always eliminates the current largest row
    index, so it terminates and fill stays local.

Rational ranks for the large case come from a squeeze: mod-p ranks bound the
rational ones from below, im d_{k+1} <= ker d_k bounds the sum from above,
so modconsistent vanishing pins every rational rank exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse as _sparse


@dataclass
class SparseIntMatrix:
    """COO integer matrix; no duplicate coordinates, no explicit zeros."""

    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_triples(cls, nrows, ncols, rows, cols, vals) -> "SparseIntMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64)
        keep = vals != 0
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        coords = rows * ncols + cols
        assert len(np.unique(coords)) == len(coords), "duplicate coordinates"
        return cls(nrows, ncols, rows, cols, vals)

    @property
    def nnz(self) -> int:
        return len(self.vals)

    def to_csr(self):
        return _sparse.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.nrows, self.ncols)
        )

    def to_csc(self):
        return _sparse.csc_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.nrows, self.ncols)
        )

    def to_dense(self) -> np.ndarray:
        M = np.zeros((self.nrows, self.ncols), dtype=np.int64)
        M[self.rows, self.cols] = self.vals
        return M

    def dump_text(self) -> str:
        """Sparse dump: first line "rows cols nnz", then "i j v" triples, 0-indexed."""
        lines = [f"{self.nrows} {self.ncols} {self.nnz}"]
        order = np.lexsort((self.cols, self.rows))
        for k in order:
            lines.append(f"{self.rows[k]} {self.cols[k]} {self.vals[k]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_text(cls, text: str) -> "SparseIntMatrix":
        lines = [x for x in text.strip().splitlines() if x.strip()]
        nrows, ncols, nnz = map(int, lines[0].split())
        data = np.array(
            [list(map(int, ln.split())) for ln in lines[1 : nnz + 1]], dtype=np.int64
        ).reshape(nnz, 3)
        return cls.from_triples(nrows, ncols, data[:, 0], data[:, 1], data[:, 2])

    def columns(self):
        """Yield (row_indices, values) per column in ascending column order."""
        order = np.lexsort((self.rows, self.cols))
        rows, cols, vals = self.rows[order], self.cols[order], self.vals[order]
        starts = np.searchsorted(cols, np.arange(self.ncols))
        ends = np.searchsorted(cols, np.arange(self.ncols), side="right")
        for c in range(self.ncols):
            yield rows[starts[c] : ends[c]], vals[starts[c] : ends[c]]


def rank_mod_p_dense(M: np.ndarray, p: int) -> int:
    """Gaussian rank of an integer matrix over F_p."""
    A = np.ascontiguousarray(np.asarray(M, dtype=np.int64) % p)
    nrows, ncols = A.shape
    if nrows > ncols:
        A = np.ascontiguousarray(A.T)
        nrows, ncols = ncols, nrows
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        col = A[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r, c:] = (A[r, c:] * inv) % p
        rest = A[r + 1 :, c]
        hit = np.nonzero(rest)[0]
        if hit.size:
            A[r + 1 + hit, c:] = (A[r + 1 + hit, c:] - rest[hit][:, None] * A[r, c:][None, :]) % p
        r += 1
    return r


def rank_rational_dense(M: np.ndarray) -> int:
    """Exact rank over Q by fraction-free elimination (python ints)."""
    A = [[int(x) for x in row] for row in np.asarray(M)]
    nrows = len(A)
    ncols = len(A[0]) if nrows else 0
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if A[i][c]:
                piv = i
                break
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        prow = A[r]
        for i in range(r + 1, nrows):
            if A[i][c]:
                f1, f2 = prow[c], A[i][c]
                A[i] = [f1 * a - f2 * b for a, b in zip(A[i], prow)]
        r += 1
        if r == nrows:
            break
    return r


class StreamRankFp:
    """Incremental sparse column rank over F_p.

    Stored columns are normalized so the pivot is the largest row index
    present; reducing a new column always strips its current largest pivoted
    row, so every reduction strictly decreases the top index and terminates.
    """

    def __init__(self, p: int, target: int | None = None):
        self.p = p
        self.target = target
        self.pivot_cols: dict[int, dict[int, int]] = {}
        self.rank = 0

    def done(self) -> bool:
        return self.target is not None and self.rank >= self.target

    def add_column(self, rows, vals) -> bool:
        """Feed one column; returns True if it increased the rank."""
        p = self.p
        col = {int(r): int(v) % p for r, v in zip(rows, vals) if int(v) % p}
        while col:
            top = max(col)
            owner = self.pivot_cols.get(top)
            if owner is None:
                inv = pow(col[top], -1, p)
                self.pivot_cols[top] = {r: (v * inv) % p for r, v in col.items()}
                self.rank += 1
                return True
            f = col[top]
            for r, v in owner.items():
                nv = (col.get(r, 0) - f * v) % p
                if nv:
                    col[r] = nv
                elif r in col:
                    del col[r]
        return False

    def feed(self, columns) -> int:
        for rows, vals in columns:
            self.add_column(rows, vals)
            if self.done():
                break
        return self.rank


def rank_mod_p(matrix, p: int, dense_limit: int = 8_000_000, target: int | None = None) -> int:
    """Rank over F_p, dense when the matrix fits, streamed otherwise."""
    if isinstance(matrix, np.ndarray):
        return rank_mod_p_dense(matrix, p)
    m: SparseIntMatrix = matrix
    if m.nrows * m.ncols <= dense_limit:
        return rank_mod_p_dense(m.to_dense(), p)
    eng = StreamRankFp(p, target=target)
    return eng.feed(m.columns())


def smith_normal_form(M, max_cols: int = 20_000) -> list[int]:
    """Invariant factors (nonzero diagonal of the Smith form) of an integer matrix.

    Dense, minimum-magnitude pivot strategy; switches to python-int entries
    when int64 headroom runs out.  Intended for matrices up to ~2e4 columns.
    """
    A = np.array(np.asarray(M), dtype=np.int64, copy=True)
    if A.size == 0:
        return []
    if min(A.shape) > max_cols:
        raise MemoryError(
            f"Smith form refused for shape {A.shape}; use modular ranks instead"
        )
    if A.shape[0] > A.shape[1]:
        A = A.T.copy()
    nrows, ncols = A.shape
    diag: list[int] = []
    obj_mode = False
    t = 0
    while t < nrows and t < ncols:
        sub = A[t:, t:]
        nz = np.nonzero(sub)
        if nz[0].size == 0:
            break
        k = int(np.argmin(np.abs(sub[nz])))
        i, j = int(nz[0][k]) + t, int(nz[1][k]) + t
        if i != t:
            A[[t, i]] = A[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
        while True:
            if not obj_mode and int(np.abs(A).max()) > 2**31:
                A = A.astype(object)
                obj_mode = True
            piv = A[t, t]
            col = A[t + 1 :, t]
            if np.any(col != 0):
                qs = col // piv
                A[t + 1 :, :] -= qs[:, None] * A[t, :][None, :]
                col = A[t + 1 :, t]
                rem = np.nonzero(col != 0)[0]
                if rem.size:
                    # a remainder of smaller magnitude becomes the new pivot
                    i = t + 1 + int(rem[int(np.argmin(np.abs(col[rem])))])
                    A[[t, i]] = A[[i, t]]
                    continue
            row = A[t, t + 1 :]
            if np.any(row != 0):
                piv = A[t, t]
                qs = row // piv
                A[:, t + 1 :] -= A[:, t][:, None] * qs[None, :]
                row = A[t, t + 1 :]
                rem = np.nonzero(row != 0)[0]
                if rem.size:
                    j = t + 1 + int(rem[int(np.argmin(np.abs(row[rem])))])
                    A[:, [t, j]] = A[:, [j, t]]
                    continue
            break
        diag.append(abs(int(A[t, t])))
        t += 1
    # enforce divisibility d_1 | d_2 | ...
    import math

    changed = True
    while changed:
        changed = False
        for i in range(len(diag) - 1):
            a, b = diag[i], diag[i + 1]
            if b % a != 0:
                g = math.gcd(a, b)
                diag[i], diag[i + 1] = g, a // g * b
                changed = True
    return diag


def integral_homology(dim_k: int, d_k, d_k1, snf_max_cols: int = 20_000):
    """(free rank, torsion factors) of ker(d_k)/im(d_k1) over Z.

    d_k maps degree k to k-1 (or None), d_k1 maps degree k+1 to k (or None).
    """
    if d_k is None:
        rank_k = 0
    else:
        factors_k = smith_normal_form(_as_dense(d_k), snf_max_cols)
        rank_k = len(factors_k)
    if d_k1 is None:
        rank_k1, torsion = 0, []
    else:
        factors = smith_normal_form(_as_dense(d_k1), snf_max_cols)
        rank_k1 = len(factors)
        torsion = [f for f in factors if f not in (0, 1)]
    free = dim_k - rank_k - rank_k1
    assert free >= 0, "rank bookkeeping violated"
    return free, torsion


def _as_dense(M):
    if isinstance(M, SparseIntMatrix):
        return M.to_dense()
    return np.asarray(M)


def rref_mod_p(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p; returns (R, pivot columns)."""
    A = np.ascontiguousarray(np.asarray(M, dtype=np.int64) % p)
    nrows, ncols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        hit = np.nonzero(A[:, c])[0]
        hit = hit[hit != r]
        if hit.size:
            A[hit] = (A[hit] - A[hit, c][:, None] * A[r][None, :]) % p
        pivots.append(c)
        r += 1
    return A[: len(pivots)], pivots


def nullspace_mod_p(M: np.ndarray, p: int) -> np.ndarray:
    """Right-kernel basis (rows) over F_p, built from the rref."""
    M = np.asarray(M)
    ncols = M.shape[1]
    R, pivots = rref_mod_p(M, p)
    free = np.setdiff1d(np.arange(ncols), np.array(pivots, dtype=np.int64))
    K = np.zeros((len(free), ncols), dtype=np.int16)
    K[np.arange(len(free)), free] = 1
    if pivots:
        K[:, np.array(pivots)] = (-R[:, free].T) % p
    return K


class BlockRankFp:
    """Incremental dense rank over F_p with blockwise reduction.

    The stored basis is kept fully reduced (unit at each pivot column, zeros
    elsewhere), so each incoming block reduces in one matrix product; exact
    because all intermediate sums stay far below 2^53 in float64.
    """

    def __init__(self, ncols: int, p: int):
        self.ncols = ncols
        self.p = p
        self.basis = np.zeros((0, ncols), dtype=np.float64)
        self.pivcols: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivcols)

    def _reduce_block(self, V: np.ndarray) -> np.ndarray:
        p = self.p
        V = np.asarray(V, dtype=np.float64) % p
        if self.pivcols:
            coeff = V[:, self.pivcols]
            V = (V - coeff @ self.basis) % p
        return V

    def add_rows(self, V: np.ndarray) -> int:
        """Feed a block of rows; returns the rank gained."""
        p = self.p
        V = self._reduce_block(V)
        Nb = np.zeros((0, self.ncols), dtype=np.float64)
        new_pivs: list[int] = []
        for i in range(V.shape[0]):
            v = V[i]
            if new_pivs:
                # Nb is kept in rref, so one subtraction clears its pivots
                v = (v - v[new_pivs] @ Nb) % p
            nz = np.nonzero(v)[0]
            if nz.size == 0:
                continue
            c = int(nz[0])
            v = (v * pow(int(v[c]), -1, p)) % p
            hit = np.nonzero(Nb[:, c])[0]
            if hit.size:
                Nb[hit] = (Nb[hit] - Nb[hit, c][:, None] * v[None, :]) % p
            Nb = np.concatenate([Nb, v[None, :]], axis=0)
            new_pivs.append(c)
        if not new_pivs:
            return 0
        # clear the new pivot columns from the old basis
        if self.pivcols:
            coeff = self.basis[:, new_pivs]
            if np.any(coeff):
                self.basis = (self.basis - coeff @ Nb) % p
        self.basis = np.concatenate([self.basis, Nb], axis=0)
        self.pivcols.extend(int(c) for c in new_pivs)
        return len(new_pivs)
