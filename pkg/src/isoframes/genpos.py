"""Constructive search and certificates for general position.

A maximal isotropic frame T = (w_1..w_n) is in general position with an
isotropic k-frame S = (v_1..v_k) when the n x k pairing matrix (h(w_i, v_j))
has a left inverse, i.e. full column rank.  Over a finite field existence is
not guaranteed for every input family, so the search reports its evidence
class: NOT_FOUND after an exhaustive sweep is a definite answer, NOT_FOUND
after random trials is only an absence of witness.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import linalg
from .hermitian import HyperbolicSpace
from .posets import _rref_extend

EXHAUSTIVE_LIMIT = 10_000_000


@dataclass
class GeneralPositionCertificate:
    """Self-contained witness; verify_certificate re-derives every claim."""

    frame: tuple
    input_frames: tuple
    pairings: list
    left_inverses: list
    perp_dims: list[int]
    evidence: dict = dc_field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "frame": [list(map(int, v)) for v in self.frame],
                "input_frames": [
                    [list(map(int, v)) for v in fr] for fr in self.input_frames
                ],
                "pairings": [np.asarray(P).tolist() for P in self.pairings],
                "left_inverses": [np.asarray(X).tolist() for X in self.left_inverses],
                "perp_dims": list(self.perp_dims),
                "evidence": self.evidence,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "GeneralPositionCertificate":
        d = json.loads(text)
        return cls(
            frame=tuple(tuple(v) for v in d["frame"]),
            input_frames=tuple(tuple(tuple(v) for v in fr) for fr in d["input_frames"]),
            pairings=[np.array(P, dtype=np.int16) for P in d["pairings"]],
            left_inverses=[np.array(X, dtype=np.int16) for X in d["left_inverses"]],
            perp_dims=list(d["perp_dims"]),
            evidence=d["evidence"],
        )


@dataclass
class NotFound:
    evidence: dict

    @property
    def exhaustive(self) -> bool:
        return self.evidence.get("mode") == "exhaustive"


def _random_isotropic_frame(space: HyperbolicSpace, size: int, rng: random.Random):
    """One uniform-ish isotropic frame grown a component at a time."""
    F = space.field
    rows: list[np.ndarray] = []
    attempts = 0
    while len(rows) < size:
        attempts += 1
        if attempts > 4000:
            return None
        if rows:
            basis = space.perp(rows)
        else:
            basis = np.eye(space.dim, dtype=np.int16)
        coeffs = np.array([rng.randrange(F.q) for _ in range(basis.shape[0])], dtype=np.int16)
        v = F.matmul(coeffs.reshape(1, -1), basis).reshape(-1)
        if not np.any(v):
            continue
        if space.form_values_diag(v.reshape(1, -1))[0] != 0:
            continue
        stack = np.array(rows + [v], dtype=np.int16)
        if linalg.rank(F, stack) != len(rows) + 1:
            continue
        rows.append(v)
    return tuple(tuple(int(x) for x in r) for r in rows)


def _pairing(space: HyperbolicSpace, T, S) -> np.ndarray:
    return space.h_matrix(np.asarray(T, dtype=np.int16), np.asarray(S, dtype=np.int16))


def _certify(space: HyperbolicSpace, T, input_frames, evidence) -> GeneralPositionCertificate | None:
    F = space.field
    pairings, invs, dims = [], [], []
    for S in input_frames:
        P = _pairing(space, T, S)
        k = len(S)
        if linalg.rank(F, P) != k:
            return None
        invs.append(linalg.left_inverse(F, P))
        pairings.append(P)
        W = np.asarray(T, dtype=np.int16)
        perp = space.perp(list(S))
        inter = _intersection_dim(F, W, perp)
        if inter != len(T) - k:
            return None
        dims.append(inter)
    return GeneralPositionCertificate(
        frame=tuple(tuple(int(x) for x in v) for v in T),
        input_frames=tuple(tuple(tuple(int(x) for x in v) for v in fr) for fr in input_frames),
        pairings=pairings,
        left_inverses=invs,
        perp_dims=dims,
        evidence=evidence,
    )


def _intersection_dim(field, A_rows, B_rows) -> int:
    ra = linalg.rank(field, A_rows)
    rb = linalg.rank(field, B_rows)
    rab = linalg.rank(field, np.concatenate([A_rows, B_rows], axis=0))
    return ra + rb - rab


def find_general_position(
    space: HyperbolicSpace,
    frames,
    seed: int = 0,
    max_trials: int = 2000,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
):
    """A maximal isotropic frame in general position with every input frame.

    Returns a verified GeneralPositionCertificate or NotFound.  Deterministic
    for a given seed: trial i uses its own rng seeded with (seed, i), so the
    first verified trial index is well defined however trials are scheduled.
    """
    n = space.rank
    frames = [tuple(tuple(int(x) for x in v) for v in fr) for fr in frames]
    for fr in frames:
        if len(fr) > n - 1:
            raise ValueError("input frames must have at most n-1 components")
        if not space.is_isotropic_frame(fr):
            raise ValueError("input frames must be isotropic and unimodular")
    if n < 2:
        raise ValueError("general position needs rank at least 2")

    for i in range(max_trials):
        rng = random.Random(seed * 1_000_003 + i)
        T = _random_isotropic_frame(space, n, rng)
        if T is None:
            continue
        cert = _certify(
            space, T, frames, {"mode": "random", "seed": seed, "trial": i}
        )
        if cert is not None:
            return cert

    est = _count_isotropic_frames_estimate(space)
    if est <= exhaustive_limit:
        count = 0
        for T in _all_isotropic_frames(space, n):
            count += 1
            cert = _certify(
                space, T, frames, {"mode": "exhaustive", "candidates": None}
            )
            if cert is not None:
                cert.evidence["candidates"] = count
                return cert
        return NotFound({"mode": "exhaustive", "candidates": count})
    return NotFound({"mode": "random", "trials": max_trials, "seed": seed})


def _count_isotropic_frames_estimate(space: HyperbolicSpace) -> int:
    iso = len(space.isotropic_vectors())
    est = 1
    for j in range(space.rank):
        est *= max(iso - j, 1)
    return est


def _all_isotropic_frames(space: HyperbolicSpace, size: int):
    F = space.field
    iso = space.isotropic_vectors()
    H = space.h_matrix(iso, iso)
    orth = H == 0

    def rec(prefix_idx, cand, R, piv):
        if len(prefix_idx) == size:
            yield tuple(tuple(int(x) for x in iso[i]) for i in prefix_idx)
            return
        red = linalg.reduce_rows(F, R, piv, iso[cand])
        ok = cand[np.any(red != 0, axis=1)]
        for c in ok:
            R2, piv2 = _rref_extend(F, R, piv, iso[c])
            yield from rec(prefix_idx + [int(c)], ok[orth[c][ok]], R2, piv2)

    R0 = np.zeros((0, space.dim), dtype=np.int16)
    yield from rec([], np.arange(len(iso)), R0, [])


def verify_certificate(space: HyperbolicSpace, cert: GeneralPositionCertificate) -> bool:
    """Re-derive every invariant from the raw frames; True iff all hold."""
    F = space.field
    try:
        T = np.asarray(cert.frame, dtype=np.int16)
        n = space.rank
        if T.shape != (n, space.dim):
            return False
        if linalg.rank(F, T) != n:
            return False
        if np.any(space.h_matrix(T, T)):
            return False
        for S, P, X, d in zip(
            cert.input_frames, cert.pairings, cert.left_inverses, cert.perp_dims
        ):
            S = np.asarray(S, dtype=np.int16)
            k = S.shape[0]
            if not np.array_equal(np.asarray(P, dtype=np.int16), _pairing(space, T, S)):
                return False
            prod = F.matmul(np.asarray(X, dtype=np.int16), np.asarray(P, dtype=np.int16))
            if not np.array_equal(prod, np.eye(k, dtype=np.int16)):
                return False
            if linalg.rank(F, P) != k:
                return False
            if _intersection_dim(F, T, space.perp(list(S))) != n - k or d != n - k:
                return False
        return True
    except Exception:
        return False


def extend_frame(field, frame, window: int, ambient: int | None = None):
    """First vector of the coordinate window making (v, frame) unimodular."""
    frame = [tuple(int(x) for x in v) for v in frame]
    if ambient is None:
        ambient = len(frame[0]) if frame else window
    if window < len(frame) + 1:
        raise ValueError("window must exceed the frame length")
    if window > ambient:
        raise ValueError("window larger than the ambient dimension")
    R = np.zeros((0, ambient), dtype=np.int16)
    piv: list[int] = []
    for v in frame:
        R, piv = _rref_extend(field, R, piv, v)
    for coeffs in itertools.product(range(field.q), repeat=window):
        if not any(coeffs):
            continue
        v = np.zeros(ambient, dtype=np.int16)
        v[:window] = coeffs
        red = linalg.reduce_rows(field, R, piv, v.reshape(1, -1))
        if np.any(red):
            return tuple(int(x) for x in v)
    raise AssertionError("no extension exists; preconditions violated")
