"""Acceptance suite: one test per criterion, one printed verdict line each.

Each criterion runs at its stated tolerance (exact arithmetic throughout)
and asserts its own runtime budget.  A failed assertion prints the FAIL line
before raising, so the summary always carries one line per criterion.
"""

import random
import time

import numpy as np
import pytest

from isoframes import linalg, spectral, unitary
from isoframes.chains import acyclicity_verdict, build_complex, homology_snf
from isoframes.fields import field_make
from isoframes.genpos import NotFound, find_general_position, verify_certificate
from isoframes.hermitian import HyperbolicSpace
from isoframes.posets import PosetComplex, PosetSpec, spec_for_space


class _Criterion:
    def __init__(self, number, title, budget_s):
        self.number = number
        self.title = title
        self.budget_s = budget_s
        self.t0 = None

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.time() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"ACCEPTANCE {self.number:>2} [{status}] {self.title} ({elapsed:.1f}s)")
        if exc_type is None:
            assert elapsed < self.budget_s, (
                f"criterion {self.number} exceeded its {self.budget_s}s budget"
            )
        return False


def test_criterion_1_frame_poset_acyclicity():
    with _Criterion(1, "isotropic line-frame poset acyclicity", 35 * 60):
        t = time.time()
        for q in (3, 5):
            F = field_make(q)
            space = HyperbolicSpace(F, 2, eps=-1)
            rep = acyclicity_verdict(spec_for_space(space, "iu-proj"), 0, coeff="int")
            assert rep.verdict == "PASS", rep.to_json()
            assert all(r["evidence"] == "exact-int" for r in rep.rows)
        assert time.time() - t < 60, "n=2 integral runs must stay under a minute"

        t = time.time()
        F3 = field_make(3)
        big = HyperbolicSpace(F3, 3, eps=-1)
        rep3 = acyclicity_verdict(spec_for_space(big, "iu-proj"), 1, coeff="mod")
        assert rep3.verdict == "PASS", rep3.to_json()
        for row in rep3.rows:
            if row["degree"] >= 0:
                assert row["modular_dims"] == {"2": 0, "5": 0}
                assert row["rational_dim"] == 0
        assert time.time() - t < 30 * 60

        t = time.time()
        F9 = field_make(3, 2, "frobenius-sqrt")
        un = HyperbolicSpace(F9, 2, eps=1)
        rep9 = acyclicity_verdict(spec_for_space(un, "iu-proj"), 0, coeff="int")
        assert rep9.verdict == "PASS", rep9.to_json()
        assert time.time() - t < 5 * 60


def test_criterion_2_link_acyclicity():
    with _Criterion(2, "window frames against a link frame", 3 * 5 * 60):
        cases = [(3, 2, 3, 1), (3, 3, 3, 1), (5, 2, 3, 1)]
        for q, n, m, r in cases:
            t = time.time()
            w_last = [0] * m
            w_last[m - 1] = 1
            w_ones = [1] * m
            for w in (tuple(w_last), tuple(w_ones)):
                spec = PosetSpec(kind="u", p=q, n=n, m=m, w=(w,))
                bound = n - r - 2
                rep = acyclicity_verdict(spec, bound, coeff="int")
                assert rep.verdict == "PASS", (q, n, m, w, rep.to_json())
            assert time.time() - t < 5 * 60


def test_criterion_3_solomon_tits():
    with _Criterion(3, "building order complex: Steinberg rank q^3", 60):
        for q, steinberg in ((2, 8), (3, 27)):
            spec = PosetSpec(kind="tits", p=q, n=3)
            cx = build_complex(spec, 2)
            assert homology_snf(cx, -1) == (0, [])
            assert homology_snf(cx, 0) == (0, [])
            free, torsion = homology_snf(cx, 1)
            assert (free, torsion) == (steinberg, []), (q, free, torsion)


def test_criterion_4_isotropic_subspace_connectivity():
    with _Criterion(4, "isotropic subspace order complex connectivity", 60):
        F3 = field_make(3)
        space = HyperbolicSpace(F3, 2, eps=-1)
        rep = acyclicity_verdict(spec_for_space(space, "iv"), 0, coeff="int")
        assert rep.verdict == "PASS", rep.to_json()


def test_criterion_5_general_position_certificates():
    with _Criterion(5, "50 seeded general-position searches, all certified", 10 * 60):
        F5 = field_make(5)
        space = HyperbolicSpace(F5, 3, eps=-1)
        from isoframes.genpos import _random_isotropic_frame

        found = 0
        for trial in range(50):
            rng = random.Random(1000 + trial)
            l = rng.randrange(1, 4)
            frames = []
            for _ in range(l):
                k = rng.randrange(1, 3)
                fr = _random_isotropic_frame(space, k, rng)
                assert fr is not None
                frames.append(fr)
            res = find_general_position(space, frames, seed=trial)
            if isinstance(res, NotFound):
                continue
            found += 1
            # independent re-verification of every certificate claim
            assert verify_certificate(space, res), f"certificate {trial} failed"
            T = np.asarray(res.frame, dtype=np.int16)
            assert space.is_isotropic_frame(list(T))
            for S, P, d in zip(res.input_frames, res.pairings, res.perp_dims):
                k = len(S)
                assert linalg.rank(F5, np.asarray(P)) == k
                assert d == space.rank - k
        assert found == 50, f"only {found}/50 searches produced a certificate"


def test_criterion_6_group_orbit_suite():
    with _Criterion(6, "group orders, transitivity, orbit-stabilizer", 10 * 60):
        F3 = field_make(3)
        for n, expected in ((1, 24), (2, 51840)):
            space = HyperbolicSpace(F3, n, eps=-1)
            assert unitary.classical_order_formula(space) == expected
            assert unitary.group_order(space) == expected
        for n in (1, 2):
            space = HyperbolicSpace(F3, n, eps=-1)
            gens = unitary.make_generators(space)
            order = unitary.group_order(space)
            cx = PosetComplex(spec_for_space(space, "iu-proj"))
            for p in range(1, n + 1):
                frame = unitary.standard_line_frame(space, p)
                orbit = unitary.orbit_of_frame(space, gens, frame)
                enumerated = {
                    tuple(tuple(int(x) for x in cx.vertices()[i]) for i in s)
                    for s in cx.simplices(p - 1)
                }
                assert set(orbit) == enumerated, (n, p)
                assert order % len(orbit) == 0
                rep = unitary.stabilizer_report(space, p, samples=5, seed=0)
                assert rep.orbit_size * rep.stab_order == order


def test_criterion_7_stabilizer_structure():
    with _Criterion(7, "stabilizer block pattern and commutator subgroup", 10 * 60):
        F3 = field_make(3)
        space = HyperbolicSpace(F3, 2, eps=-1)
        rep = unitary.stabilizer_report(space, 2, samples=200, seed=0)
        assert rep.samples_checked == 200
        assert rep.samples_pattern_ok == 200, "sampled stabilizer element off-pattern"
        assert rep.nprime_pattern_order == 27  # |Lambda|^2 q
        assert rep.nprime_pattern_is_group and rep.nprime_pattern_in_stab
        # every element of the computed commutator subgroup matches the display
        assert rep.derived_inside_pattern
        # The criterion demands that the commutator closure itself have order
        # 27 = |Lambda|^2 q at (n, p) = (2, 2).  The radical of this
        # stabilizer is abelian (its three parameters add under composition),
        # so its derived subgroup is trivial and the demanded order is not
        # attainable; see notes/decisions.md.  One rank higher the radical is
        # nonabelian and the commutator subgroup fills the displayed pattern
        # exactly (covered by test_commutator_pattern_holds_at_rank_three).
        assert rep.nprime_derived_order == 27, (
            "commutator closure of the rank-2 radical has order "
            f"{rep.nprime_derived_order}, not 27: the radical is abelian at "
            "(n, p) = (2, 2); the displayed pattern group does have order 27 "
            "and contains the commutator subgroup (both asserted above), and "
            "the order-27 commutator claim holds at rank 3"
        )


def test_criterion_8_bottom_row():
    with _Criterion(8, "bottom row terms, differentials, exactness, triangle", 10 * 60):
        for q in (3, 5):
            F = field_make(q)
            for n in (1, 2):
                space = HyperbolicSpace(F, n, eps=-1)
                row = spectral.build_bottom_row(
                    space, ell=5, with_coinvariants=(q == 3)
                )
                assert all(t["dim"] == 1 for t in row.terms)
                for p in range(1, n + 1):
                    assert row.d1_scalar(p) == (1 if p % 2 == 1 else 0)
                res = spectral.check_E2_vanishing(row)
                assert res["verdict"] == "PASS", (q, n, res)
            theta = spectral.theta_check(HyperbolicSpace(F, 2, eps=-1), ell=5)
            assert theta["boundary_zero"]
            assert theta["top_map_value"] == 1
            assert theta["verdict"] == "PASS"


def test_criterion_9_chain_map():
    with _Criterion(9, "prefixing chain map commutes with the boundary", 5 * 60):
        F3 = field_make(3)
        space = HyperbolicSpace(F3, 3, eps=-1)
        res = spectral.alpha_chain_map_check(space, samples=100, seed=0)
        assert res["verdict"] == "PASS"
        assert res["checked"] == 100


def test_criterion_10_coprime_module_homology():
    with _Criterion(10, "finite module homology with coprime coefficients", 60):
        assert spectral.coprime_module_homology(3, 2, 5, 3) == [1, 0, 0, 0]
        els = [0, 1, 2]
        mult = lambda a, b: (a + b) % 3
        bar = spectral.bar_homology_dims(els, mult, 2, 2)
        assert bar == spectral.coprime_module_homology(3, 1, 2, 2) == [1, 0, 0]


def test_criterion_11_h1_stability():
    with _Criterion(11, "first homology stability across the inclusion", 10 * 60):
        F3, F5 = field_make(3), field_make(5)
        for F, ell in ((F3, 2), (F5, 3)):
            res = spectral.h1_stability_check(F, F.minus_one, ell=ell, n_max=1)
            assert res["verdict"] == "PASS", res
            row = res["rows"][1]
            assert row["claimed_surjective"] and row["surjective"]
            assert row["injective"]  # observed; claimed only from the next map


def test_criterion_12_structural_suites():
    with _Criterion(12, "boundary squares, form preservation, torsion witness", 10 * 60):
        F3 = field_make(3)
        space = HyperbolicSpace(F3, 2, eps=-1)
        # d o d = 0 is asserted inside every build; construct a few here
        build_complex(spec_for_space(space, "iu-proj"), 1)
        build_complex(PosetSpec(kind="tits", p=2, n=3), 2)
        build_complex(PosetSpec(kind="u", p=3, n=2), 1)
        # form preservation of every element touched in a full closure
        gens = unitary.make_generators(space)
        small = HyperbolicSpace(F3, 1, eps=-1)
        els = unitary.mulclose(small.field, unitary.make_generators(small))
        assert bool(np.all(unitary.batch_is_member(small, np.stack(els))))
        assert all(unitary.is_member(space, g.matrix) for g in gens)
        # face closure: rebuilding complexes above proves lookup of every face
        # torsion witness
        tris = [
            (0, 1, 4), (0, 1, 5), (0, 2, 3), (0, 2, 4), (0, 3, 5),
            (1, 2, 3), (1, 2, 5), (1, 3, 4), (2, 4, 5), (3, 4, 5),
        ]
        edges = sorted({(t[i], t[j]) for t in tris for i, j in ((0, 1), (0, 2), (1, 2))})
        projective_plane = {0: [(i,) for i in range(6)], 1: edges, 2: sorted(tris)}
        cx = build_complex(projective_plane, 2)
        assert homology_snf(cx, 1) == (0, [2])
        # determinism under a fixed seed
        a = unitary.stabilizer_report(space, 2, samples=10, seed=5)
        b = unitary.stabilizer_report(space, 2, samples=10, seed=5)
        assert a.to_dict() == b.to_dict()
