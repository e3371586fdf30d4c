"""Enumeration of frame posets and order complexes.

Simplex kinds:

  u        ordered unimodular frames of vectors lying in a coordinate window
  u-proj   the same with components replaced by normalized lines
  iu       ordered isotropic unimodular frames of vectors in a hyperbolic space
  iu-proj  the projective version
  iv       chains of nonzero isotropic subspaces (order complex)
  tits     chains of proper nonzero subspaces (order complex)

For the frame kinds a k-simplex is an ordered (k+1)-tuple, every ordering a
distinct simplex, and faces delete one component.  For the order complexes a
simplex is an inclusion-increasing chain.  A link frame w restricts a frame
kind to tuples x with (x, w) jointly in the parent poset.

Enumeration is by backtracking with incremental rank and orthogonality
filters; output is in lexicographic canonical order and deterministic.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import linalg
from .fields import ConfigurationError, FiniteField
from .hermitian import HyperbolicSpace

KIND_U = "u"
KIND_U_PROJ = "u-proj"
KIND_IU = "iu"
KIND_IU_PROJ = "iu-proj"
KIND_IV = "iv"
KIND_TITS = "tits"

FRAME_KINDS = (KIND_U, KIND_U_PROJ, KIND_IU, KIND_IU_PROJ)
CHAIN_KINDS = (KIND_IV, KIND_TITS)

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class PosetSpec:
    """Parameters selecting one poset.

    For the iu kinds `n` is the hyperbolic rank (ambient dimension 2n) and
    `eps` the form sign code.  For the u kinds frames live in the first `n`
    coordinates of F^m.  For iv/tits, `n` is the ambient dimension (2n is NOT
    implied; pass the full dimension via n for tits and the hyperbolic rank
    for iv).
    """

    kind: str
    p: int
    e: int = 1
    involution: str = "identity"
    n: int = 1
    m: int | None = None
    eps: int | None = None
    w: tuple | None = None
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.kind not in FRAME_KINDS + CHAIN_KINDS:
            raise ConfigurationError(f"unknown poset kind {self.kind!r}")
        if self.kind in (KIND_U, KIND_U_PROJ):
            if self.m is not None and self.m < self.n:
                raise ConfigurationError("window n must be at most the ambient m")
        if self.w is not None and self.kind in CHAIN_KINDS:
            raise ConfigurationError("link frames only apply to frame kinds")

    @property
    def q(self) -> int:
        return self.p**self.e

    def cache_key(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "e": self.e,
            "involution": self.involution,
            "n": self.n,
            "m": self.m,
            "eps": self.eps,
            "w": None if self.w is None else [list(map(int, v)) for v in self.w],
        }


def spec_for_space(space: HyperbolicSpace, kind: str, w=None, budget=DEFAULT_BUDGET) -> PosetSpec:
    f = space.field
    return PosetSpec(
        kind=kind,
        p=f.p,
        e=f.e,
        involution=f.involution,
        n=space.rank,
        eps=space.eps,
        w=None if w is None else tuple(tuple(int(x) for x in v) for v in w),
        budget=budget,
    )


def link_restrict(spec: PosetSpec, w) -> PosetSpec:
    """Spec of the link: simplices x with (x, w) jointly in the parent poset."""
    w = tuple(tuple(int(x) for x in v) for v in w)
    if not w:
        return spec
    if spec.w is not None:
        w = w + spec.w
    return replace(spec, w=w)


class PosetComplex:
    """Vertices plus per-degree simplex index arrays for one PosetSpec."""

    def __init__(self, spec: PosetSpec, cache=None, threads: int = 1):
        self.spec = spec
        self.cache = cache
        self.threads = max(1, threads)
        self.field = FiniteField(spec.p, spec.e, spec.involution)
        self.space = None
        if spec.kind in (KIND_IU, KIND_IU_PROJ, KIND_IV):
            if spec.eps is None:
                raise ConfigurationError("isotropic kinds need eps")
            self.space = HyperbolicSpace(self.field, spec.n, spec.eps)
        self._vertices = None
        self._vertex_matrix = None
        self._simplices: dict[int, np.ndarray] = {}
        self._link_matrix = None
        if spec.w is not None:
            self._link_matrix = np.asarray(spec.w, dtype=np.int16)
            self._validate_link()

    # -- vertex sets --------------------------------------------------------

    def _ambient_dim(self) -> int:
        s = self.spec
        if s.kind in (KIND_IU, KIND_IU_PROJ, KIND_IV):
            return 2 * s.n
        if s.kind in (KIND_U, KIND_U_PROJ):
            return s.m if s.m is not None else s.n
        return s.n  # tits

    def _window_vectors(self) -> np.ndarray:
        """Nonzero vectors supported on the first n of m coordinates."""
        s = self.spec
        q, n, m = s.q, s.n, self._ambient_dim()
        grids = np.meshgrid(*[np.arange(q, dtype=np.int16)] * n, indexing="ij")
        W = np.stack([g.ravel() for g in grids], axis=1)[1:]
        if m > n:
            W = np.concatenate([W, np.zeros((len(W), m - n), dtype=np.int16)], axis=1)
        return W

    def _lines_of(self, V: np.ndarray) -> np.ndarray:
        """Normalized representatives (first nonzero coordinate 1), deduplicated."""
        F = self.field
        V = np.asarray(V, dtype=np.int16)
        lead = np.argmax(V != 0, axis=1)
        scale = F._inv[V[np.arange(len(V)), lead]]
        W = F.mul[scale[:, None], V]
        W = np.unique(W, axis=0)
        return W

    def vertices(self) -> np.ndarray:
        """Vertex payload matrix (frame kinds) or list of subspace bases."""
        if self._vertices is not None:
            return self._vertices
        s = self.spec
        if s.kind == KIND_U:
            V = self._window_vectors()
        elif s.kind == KIND_U_PROJ:
            V = self._lines_of(self._window_vectors())
        elif s.kind == KIND_IU:
            V = self.space.isotropic_vectors()
        elif s.kind == KIND_IU_PROJ:
            V = self._lines_of(self.space.isotropic_vectors())
        elif s.kind in CHAIN_KINDS:
            V = self._subspace_vertices()
        else:  # pragma: no cover
            raise AssertionError(s.kind)
        if s.kind in FRAME_KINDS and self._link_matrix is not None:
            V = V[self._compatible_with_link(V)]
        self._vertices = V
        if s.kind in FRAME_KINDS:
            self._vertex_matrix = V
        return self._vertices

    def _validate_link(self):
        W = self._link_matrix
        if W.shape[1] != self._ambient_dim():
            raise ValueError("link frame has the wrong ambient dimension")
        if linalg.rank(self.field, W) != W.shape[0]:
            raise ValueError("link w is not a frame (components dependent)")
        if self.spec.kind in (KIND_IU, KIND_IU_PROJ):
            if np.any(self.space.h_matrix(W, W)):
                raise ValueError("link w is not an isotropic frame")

    def _compatible_with_link(self, V: np.ndarray) -> np.ndarray:
        """Mask of vertices v with (v, w) jointly in the parent poset."""
        W = self._link_matrix
        R, piv = linalg.rref(self.field, W)
        red = linalg.reduce_rows(self.field, R, piv, V)
        mask = np.any(red != 0, axis=1)
        if self.spec.kind in (KIND_IU, KIND_IU_PROJ):
            mask &= ~np.any(self.space.h_matrix(V, W) != 0, axis=1)
        return mask

    # -- subspace machinery (iv / tits) --------------------------------------

    def _all_subspaces(self, dim_ambient: int, dims) -> list[np.ndarray]:
        """All subspaces of the given dimensions as rref bases, canonical order."""
        q = self.spec.q
        out = []
        for d in dims:
            mats = []
            for piv in itertools.combinations(range(dim_ambient), d):
                free_cols = [
                    (r, c)
                    for r in range(d)
                    for c in range(dim_ambient)
                    if c > piv[r] and c not in piv
                ]
                for vals in itertools.product(range(q), repeat=len(free_cols)):
                    M = np.zeros((d, dim_ambient), dtype=np.int16)
                    for r, c in enumerate(piv):
                        M[r, c] = 1
                    for (r, c), v in zip(free_cols, vals):
                        M[r, c] = v
                    mats.append(M)
            out.extend(mats)
        return out

    def _subspace_vertices(self):
        s = self.spec
        D = self._ambient_dim()
        if s.kind == KIND_TITS:
            dims = range(1, D)
            subs = self._all_subspaces(D, dims)
        else:  # iv: nonzero isotropic subspaces, dimension at most rank
            dims = range(1, s.n + 1)
            subs = [
                M
                for M in self._all_subspaces(D, dims)
                if not np.any(self.space.h_matrix(M, M))
            ]
        subs.sort(key=lambda M: (M.shape[0], M.tobytes()))
        return subs

    # -- simplex enumeration --------------------------------------------------

    def n_vertices(self) -> int:
        return len(self.vertices())

    def simplices(self, k: int) -> np.ndarray:
        """Index array (N, k+1) of the k-simplices, canonical order."""
        if k < 0:
            raise ValueError("degree must be nonnegative")
        if k in self._simplices:
            return self._simplices[k]
        if self.cache is not None:
            hit = self.cache.load(self.spec.cache_key(), k)
            if hit is not None:
                self._simplices[k] = hit
                return hit
        if self.spec.kind in CHAIN_KINDS:
            out = self._enumerate_chains(k)
        else:
            out = self._enumerate_frames(k)
        self._simplices[k] = out
        if self.cache is not None:
            self.cache.store(self.spec.cache_key(), k, out)
        return out

    def _orthogonality(self) -> np.ndarray:
        """Boolean matrix: h vanishes both ways between vertex payloads."""
        V = self.vertices()
        H = self.space.h_matrix(V, V)
        return H == 0

    def _enumerate_frames(self, k: int) -> np.ndarray:
        V = self.vertices()
        nv = len(V)
        if k == 0:
            if nv > self.spec.budget:
                raise BudgetExceeded(
                    f"degree-0 enumeration of {nv} exceeds budget", estimate=nv
                )
            return np.arange(nv, dtype=np.int32)[:, None]
        F = self.field
        isotropic = self.spec.kind in (KIND_IU, KIND_IU_PROJ)
        orth = self._orthogonality() if isotropic else None
        Wlink = self._link_matrix

        budget = self.spec.budget
        chunks: list[np.ndarray] = []
        total = 0

        def extend(prefix: list[int], cands: np.ndarray, R, piv, depth: int, out: list):
            nonlocal total
            base = np.asarray(V[cands], dtype=np.int16)
            red = linalg.reduce_rows(F, R, piv, base)
            ok = cands[np.any(red != 0, axis=1)]
            if depth == k:
                if len(prefix):
                    rows = np.empty((len(ok), k + 1), dtype=np.int32)
                    rows[:, :k] = prefix
                    rows[:, k] = ok
                else:
                    rows = ok[:, None].astype(np.int32)
                out.append(rows)
                total += len(ok)
                if total > budget:
                    raise BudgetExceeded(
                        f"enumeration exceeded budget {budget}", estimate=total
                    )
                return
            for c in ok:
                R2, piv2 = _rref_extend(F, R, piv, V[c])
                nxt = ok[orth[c][ok]] if isotropic else cands
                extend(prefix + [int(c)], nxt, R2, piv2, depth + 1, out)

        def run_partition(start_idx: int) -> list:
            out: list = []
            R0 = np.zeros((0, V.shape[1]), dtype=np.int16)
            piv0: list[int] = []
            if Wlink is not None:
                R0, piv0 = linalg.rref(F, Wlink)
            c = start_idx
            R1, piv1 = _rref_extend(F, R0, piv0, V[c])
            cands = np.arange(nv, dtype=np.int32)
            if isotropic:
                cands = cands[orth[c][cands]]
            extend([int(c)], cands, R1, piv1, 1, out)
            return out

        starts = list(range(nv))
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(run_partition, starts))
        else:
            results = [run_partition(c) for c in starts]
        for res in results:
            chunks.extend(res)
        if not chunks:
            return np.zeros((0, k + 1), dtype=np.int32)
        out = np.concatenate(chunks, axis=0)
        order = np.lexsort(out.T[::-1])
        return out[order]

    def _enumerate_chains(self, k: int) -> np.ndarray:
        subs = self.vertices()
        nv = len(subs)
        if k == 0:
            return np.arange(nv, dtype=np.int32)[:, None]
        F = self.field
        rrefs = [linalg.rref(F, M) for M in subs]
        dims = np.array([M.shape[0] for M in subs])
        contains = np.zeros((nv, nv), dtype=bool)
        for i in range(nv):
            Ri, pivi = rrefs[i]
            for j in range(nv):
                if dims[j] > dims[i]:
                    Rj, pivj = rrefs[j]
                    red = linalg.reduce_rows(F, Rj, pivj, Ri)
                    contains[i, j] = not np.any(red)
        rows: list[tuple] = []
        budget = self.spec.budget

        def grow(chain: tuple):
            if len(chain) == k + 1:
                rows.append(chain)
                if len(rows) > budget:
                    raise BudgetExceeded("chain enumeration exceeded budget")
                return
            last = chain[-1]
            for j in np.nonzero(contains[last])[0]:
                grow(chain + (int(j),))

        for i in range(nv):
            grow((i,))
        out = np.array(rows, dtype=np.int32).reshape(-1, k + 1)
        order = np.lexsort(out.T[::-1])
        return out[order]

    # -- payload access -------------------------------------------------------

    def frame_payload(self, simplex) -> tuple:
        V = self.vertices()
        if self.spec.kind in CHAIN_KINDS:
            return tuple(tuple(map(tuple, V[int(i)].tolist())) for i in simplex)
        return tuple(tuple(int(x) for x in V[int(i)]) for i in simplex)

    def frames(self, k: int) -> list[tuple]:
        return [self.frame_payload(s) for s in self.simplices(k)]

    def vertex_index(self, payload) -> int:
        V = self.vertices()
        if self.spec.kind in CHAIN_KINDS:
            target = np.asarray(payload, dtype=np.int16)
            for i, M in enumerate(V):
                if M.shape == target.shape and np.array_equal(M, target):
                    return i
            raise KeyError("subspace not found")
        arr = np.asarray(payload, dtype=np.int16)
        hits = np.nonzero(np.all(V == arr, axis=1))[0]
        if hits.size == 0:
            raise KeyError(f"vertex {payload} not in poset")
        return int(hits[0])


def _rref_extend(field, R, pivots, v):
    """rref basis extended by one row (assumed independent or checked by caller)."""
    v = np.array(v, dtype=np.int16, copy=True)
    for r, c in enumerate(pivots):
        if v[c]:
            v = field.sub[v, field.mul[v[c], R[r]]]
    nz = np.nonzero(v)[0]
    if nz.size == 0:
        return R, list(pivots)
    c = int(nz[0])
    v = field.mul[field.invert(int(v[c])), v]
    newR = np.concatenate([R, v[None, :]], axis=0)
    newpiv = list(pivots) + [c]
    # keep full reduction: clear column c in earlier rows
    for r in range(len(R)):
        if newR[r, c]:
            newR[r] = field.sub[newR[r], field.mul[newR[r, c], v]]
    return newR, newpiv


def enumerate_simplices(spec: PosetSpec, k: int, cache=None, threads: int = 1):
    """Public enumeration: payload tuples of all k-simplices, canonical order."""
    cx = PosetComplex(spec, cache=cache, threads=threads)
    return cx.frames(k)


def enumerate_chains(spec: PosetSpec, length: int, cache=None):
    """All strictly increasing chains with `length` subspaces."""
    if spec.kind not in CHAIN_KINDS:
        raise ConfigurationError("enumerate_chains needs an iv or tits spec")
    if length < 1:
        raise ValueError("chain length must be at least 1")
    cx = PosetComplex(spec, cache=cache)
    return cx.frames(length - 1)
