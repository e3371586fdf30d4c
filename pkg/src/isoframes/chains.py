"""Chain complexes of frame posets and exact homology verdicts.

The degree-k chain group has the k-simplices as basis; the boundary deletes
components with alternating signs, and an augmentation to a rank-1 group in
degree -1 makes every reported homology reduced.  d(d(x)) = 0 is verified
eagerly on every build, and face lookup failures would abort the build, so a
constructed complex is itself a face-closure certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import FiniteField, excluded_from_frame_acyclicity
from .intlinalg import (
    SparseIntMatrix,
    StreamRankFp,
    integral_homology,
    rank_mod_p_dense,
    rank_rational_dense,
    smith_normal_form,
)
from .posets import CHAIN_KINDS, FRAME_KINDS, PosetComplex, PosetSpec

SNF_COLUMN_BUDGET = 20_000
DENSE_CELLS = 8_000_000
MODULAR_PRIMES = (2, 5)


class RefusalError(RuntimeError):
    """The requested check is outside the supported hypotheses."""


@dataclass
class ChainComplexData:
    """Simplex bases and integer boundary matrices up to a degree."""

    dims: list[int]
    boundaries: dict[int, SparseIntMatrix]
    augmentation: SparseIntMatrix
    simplex_codes: list[np.ndarray]
    label: str = ""

    def dim(self, k: int) -> int:
        if k == -1:
            return 1
        if 0 <= k < len(self.dims):
            return self.dims[k]
        return 0

    def boundary(self, k: int) -> SparseIntMatrix | None:
        """The map from degree k to degree k-1 (k=0 gives the augmentation)."""
        if k == 0:
            return self.augmentation
        return self.boundaries.get(k)

    @property
    def max_degree(self) -> int:
        return len(self.dims) - 1


def _encode_simplices(S: np.ndarray, base: int) -> np.ndarray:
    code = np.zeros(len(S), dtype=np.int64)
    for j in range(S.shape[1]):
        code = code * base + S[:, j]
    return code


def build_complex(source, max_degree: int, cache=None, threads: int = 1, label: str = "") -> ChainComplexData:
    """Chain complex of a poset (or raw simplex lists) up to max_degree.

    `source` is a PosetSpec, a PosetComplex, or a dict {degree: list of
    tuples} for toy complexes.  Boundaries satisfy d(d(x)) = 0, checked here.
    """
    if isinstance(source, PosetSpec):
        source = PosetComplex(source, cache=cache, threads=threads)
    if isinstance(source, PosetComplex):
        simplex_arrays = []
        for k in range(max_degree + 1):
            simplex_arrays.append(np.asarray(source.simplices(k), dtype=np.int64))
        nv = source.n_vertices()
        if not label:
            label = f"{source.spec.kind}(q={source.spec.q}, n={source.spec.n})"
    else:
        degrees = sorted(source)
        simplex_arrays = []
        for k in range(max_degree + 1):
            entries = sorted(tuple(s) for s in source.get(k, []))
            simplex_arrays.append(np.asarray(entries, dtype=np.int64).reshape(-1, k + 1))
        nv = int(max((s.max() for s in simplex_arrays if s.size), default=-1)) + 1
    base = max(nv, 2)

    dims = [len(S) for S in simplex_arrays]
    codes = [_encode_simplices(S, base) for S in simplex_arrays]
    for c in codes:
        assert np.all(np.diff(c) > 0), "simplices must be strictly sorted and unique"

    boundaries: dict[int, SparseIntMatrix] = {}
    for k in range(1, max_degree + 1):
        S = simplex_arrays[k]
        n_k, n_km1 = dims[k], dims[k - 1]
        if n_k == 0:
            boundaries[k] = SparseIntMatrix.from_triples(n_km1, 0, [], [], [])
            continue
        rows_parts, cols_parts, vals_parts = [], [], []
        cols = np.arange(n_k, dtype=np.int64)
        for i in range(k + 1):
            face = np.delete(S, i, axis=1)
            fcode = _encode_simplices(face, base)
            pos = np.searchsorted(codes[k - 1], fcode)
            ok = (pos < n_km1) & (codes[k - 1][np.minimum(pos, n_km1 - 1)] == fcode)
            if not np.all(ok):
                raise AssertionError("face closure violated: missing face in lower degree")
            rows_parts.append(pos)
            cols_parts.append(cols)
            vals_parts.append(np.full(n_k, (-1) ** i, dtype=np.int64))
        rows = np.concatenate(rows_parts)
        colsc = np.concatenate(cols_parts)
        vals = np.concatenate(vals_parts)
        # distinct deletions of a frame/chain give distinct faces, so no
        # coordinate collisions occur; from_triples asserts that.
        boundaries[k] = SparseIntMatrix.from_triples(n_km1, n_k, rows, colsc, vals)

    aug = SparseIntMatrix.from_triples(
        1, dims[0], np.zeros(dims[0], dtype=np.int64), np.arange(dims[0]), np.ones(dims[0], dtype=np.int64)
    )
    cx = ChainComplexData(dims=dims, boundaries=boundaries, augmentation=aug, simplex_codes=codes, label=label)
    _verify_dd_zero(cx)
    return cx


def _verify_dd_zero(cx: ChainComplexData) -> None:
    for k in range(1, cx.max_degree + 1):
        upper = cx.boundary(k)
        lower = cx.boundary(k - 1)
        if upper is None or lower is None or upper.ncols == 0:
            continue
        prod = lower.to_csr() @ upper.to_csr()
        assert prod.nnz == 0 or not np.any(prod.data), f"d o d != 0 at degree {k}"


# -- homology ---------------------------------------------------------------


def _rank_engine(m: SparseIntMatrix, p: int, target: int | None) -> int:
    if m.ncols == 0 or m.nrows == 0:
        return 0
    if m.nrows * m.ncols <= DENSE_CELLS:
        return rank_mod_p_dense(m.to_dense(), p)
    eng = StreamRankFp(p, target=target)
    return eng.feed(m.columns())


def homology_field(cx: ChainComplexData, k: int, p: int) -> int:
    """dim of reduced homology at degree k over F_p (p=0 means Q)."""
    if k < -1 or k > cx.max_degree:
        raise ValueError(f"degree {k} outside the built range")
    if k == -1:
        return 0 if cx.dim(0) > 0 else 1
    dk = cx.boundary(k)
    dk1 = cx.boundary(k + 1) if k + 1 <= cx.max_degree else None
    if p == 0:
        r_k = _rank_rational(dk)
        r_k1 = _rank_rational(dk1) if dk1 is not None else 0
    else:
        r_k = _rank_engine(dk, p, target=None) if dk is not None else 0
        kernel = cx.dim(k) - r_k
        r_k1 = _rank_engine(dk1, p, target=kernel) if dk1 is not None else 0
    return cx.dim(k) - r_k - r_k1


def _rank_rational(m: SparseIntMatrix | None) -> int:
    if m is None or m.ncols == 0 or m.nrows == 0:
        return 0
    if m.nrows * m.ncols > DENSE_CELLS:
        raise MemoryError(
            "rational rank needs the dense engine; use modular ranks with the "
            "squeeze argument at this size"
        )
    return rank_rational_dense(m.to_dense())


def homology_snf(cx: ChainComplexData, k: int) -> tuple[int, list[int]]:
    """Integral reduced homology at degree k: (free rank, torsion factors)."""
    if k == -1:
        return (0 if cx.dim(0) > 0 else 1), []
    dk = cx.boundary(k)
    dk1 = cx.boundary(k + 1) if k + 1 <= cx.max_degree else None
    for m in (dk, dk1):
        if m is not None and m.ncols > SNF_COLUMN_BUDGET and m.nrows > SNF_COLUMN_BUDGET:
            raise MemoryError(
                f"SNF budget exceeded at degree {k} (shape {m.nrows}x{m.ncols}); "
                "advise: field-rank fallback over several primes"
            )
    return integral_homology(cx.dim(k), dk, dk1, SNF_COLUMN_BUDGET)


@dataclass
class HomologyReport:
    """Per-degree homology with the evidence class that produced it."""

    label: str
    bound: int
    rows: list[dict] = dc_field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "PASS" if all(r["verdict"] == "PASS" for r in self.rows) else "FAIL"

    def failing_degrees(self) -> list[int]:
        return [r["degree"] for r in self.rows if r["verdict"] != "PASS"]

    def to_json(self) -> str:
        return json.dumps(
            {"label": self.label, "bound": self.bound, "verdict": self.verdict, "rows": self.rows},
            indent=2,
            sort_keys=True,
        )


def _snf_fits(cx: ChainComplexData, bound: int) -> bool:
    for k in range(0, bound + 2):
        m = cx.boundary(k)
        if m is not None and m.ncols > SNF_COLUMN_BUDGET and m.nrows > SNF_COLUMN_BUDGET:
            return False
        if m is not None and m.nrows * m.ncols > 4 * DENSE_CELLS:
            return False
    return True


def acyclicity_verdict(
    source,
    bound: int,
    coeff: str = "auto",
    cache=None,
    threads: int = 1,
    label: str = "",
) -> HomologyReport:
    """PASS iff reduced homology vanishes in degrees -1..bound.

    coeff: "int" for Smith-form Z homology, "mod" for modular ranks over
    several primes with the rational squeeze, "auto" to pick by size.
    Degree -1 records nonemptiness (surjective augmentation).
    """
    if isinstance(source, PosetSpec):
        _refuse_excluded_configs(source)
        source = PosetComplex(source, cache=cache, threads=threads)
    cx = source if isinstance(source, ChainComplexData) else build_complex(source, bound + 1, cache=cache, threads=threads, label=label)
    if label:
        cx.label = label

    if coeff == "auto":
        coeff = "int" if _snf_fits(cx, bound) else "mod"
    report = HomologyReport(label=cx.label, bound=bound)

    nonempty = cx.dim(0) > 0
    report.rows.append(
        {
            "degree": -1,
            "coeff": "Z" if coeff == "int" else "squeeze",
            "rank": 0 if nonempty else 1,
            "torsion": [],
            "evidence": "exact-int",
            "verdict": "PASS" if nonempty else "FAIL",
        }
    )
    if coeff == "int":
        for k in range(0, bound + 1):
            free, torsion = homology_snf(cx, k)
            report.rows.append(
                {
                    "degree": k,
                    "coeff": "Z",
                    "rank": free,
                    "torsion": torsion,
                    "evidence": "exact-int",
                    "verdict": "PASS" if free == 0 and not torsion else "FAIL",
                }
            )
        return report
    if coeff == "rat":
        for k in range(0, bound + 1):
            dim = homology_field(cx, k, 0)
            report.rows.append(
                {
                    "degree": k,
                    "coeff": "Q",
                    "rank": dim,
                    "torsion": [],
                    "evidence": "rational-rank",
                    "verdict": "PASS" if dim == 0 else "FAIL",
                }
            )
        return report
    if coeff.isdigit():
        p = int(coeff)
        for k in range(0, bound + 1):
            dim = homology_field(cx, k, p)
            report.rows.append(
                {
                    "degree": k,
                    "coeff": f"F{p}",
                    "rank": dim,
                    "torsion": [],
                    "evidence": "modular-rank",
                    "verdict": "PASS" if dim == 0 else "FAIL",
                }
            )
        return report
    if coeff != "mod":
        raise ValueError(f"unknown coefficient selector {coeff!r}")

    # modular ranks over several primes plus the rational squeeze
    squeeze = _modular_squeeze(cx, bound)
    report.rows.extend(squeeze)
    return report


def _modular_squeeze(cx: ChainComplexData, bound: int) -> list[dict]:
    """Vanishing over each sample prime forces the rational ranks to agree:
    modular ranks bound rational ranks from below while d(d(x)) = 0 bounds
    their sums from above, so equality over F_p pins them exactly."""
    rows = []
    ranks: dict[tuple[int, int], int] = {}
    for p in MODULAR_PRIMES:
        prev_rank = None
        for k in range(0, bound + 2):
            m = cx.boundary(k)
            if m is None:
                ranks[(p, k)] = 0
                continue
            if k <= bound:
                ranks[(p, k)] = _rank_engine(m, p, target=None)
            else:
                kernel = cx.dim(k - 1) - ranks[(p, k - 1)]
                ranks[(p, k)] = _rank_engine(m, p, target=kernel)
    for k in range(0, bound + 1):
        dims_match = {}
        for p in MODULAR_PRIMES:
            dims_match[p] = cx.dim(k) - ranks[(p, k)] - ranks[(p, k + 1)]
        all_zero = all(v == 0 for v in dims_match.values())
        agree = len(set(dims_match.values())) == 1
        rational = dims_match[MODULAR_PRIMES[0]] if all_zero else None
        rows.append(
            {
                "degree": k,
                "coeff": "squeeze(" + ",".join(f"F{p}" for p in MODULAR_PRIMES) + "->Q)",
                "rank": dims_match[MODULAR_PRIMES[0]] if agree else max(dims_match.values()),
                "torsion": [],
                "modular_dims": {str(p): int(v) for p, v in dims_match.items()},
                "rational_dim": rational,
                "evidence": "modular-rank+squeeze" if all_zero else "modular-rank",
                "verdict": "PASS" if all_zero else "FAIL",
            }
        )
    return rows


def _refuse_excluded_configs(spec: PosetSpec) -> None:
    if spec.kind in FRAME_KINDS and spec.q == 2:
        raise RefusalError(
            "acyclicity checks over the two-element field are refused: the "
            "connectivity theorems for unimodular-frame posets require |F| > 2"
        )
    if spec.kind == "iv" and spec.q == 2:
        raise RefusalError(
            "the isotropic-subspace connectivity statement requires |F| > 2"
        )
