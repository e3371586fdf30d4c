import random

import numpy as np
import pytest

from isoframes import linalg, unitary
from isoframes.fields import field_make
from isoframes.hermitian import HyperbolicSpace, UnsupportedConvention
from isoframes.posets import PosetComplex, spec_for_space


def test_generators_preserve_form(sp_f3_n2, un_f9_n2):
    for space in (sp_f3_n2, un_f9_n2):
        for g in unitary.make_generators(space):
            assert unitary.is_member(space, g.matrix)


def test_is_member_examples(sp_f3_n2):
    F = sp_f3_n2.field
    assert unitary.is_member(sp_f3_n2, np.eye(4, dtype=np.int16))
    a = 2
    M = np.diag([a, F.invert(int(F.conj[a])), 1, 1]).astype(np.int16)
    assert unitary.is_member(sp_f3_n2, M)
    bad = np.eye(4, dtype=np.int16)
    bad[0, 0] = 2  # scales e1 only: h(e1, e2) breaks
    assert not unitary.is_member(sp_f3_n2, bad)


def test_group_orders_match_classical_formulas():
    F3, F5 = field_make(3), field_make(5)
    F9 = field_make(3, 2, "frobenius-sqrt")
    cases = [
        (HyperbolicSpace(F3, 1, eps=-1), 24),
        (HyperbolicSpace(F3, 2, eps=-1), 51840),
        (HyperbolicSpace(F5, 1, eps=-1), 120),
        (HyperbolicSpace(F9, 1, eps=1), 96),
        (HyperbolicSpace(F3, 1, eps=1), 4),
        (HyperbolicSpace(F3, 2, eps=1), 1152),
    ]
    for space, expected in cases:
        assert unitary.classical_order_formula(space) == expected
        assert unitary.group_order(space) == expected


def test_mulclose_agrees_with_bsgs(sp_f3_n1):
    gens = unitary.make_generators(sp_f3_n1)
    els = unitary.mulclose(sp_f3_n1.field, gens)
    assert len(els) == 24
    # every element of the closure preserves the form
    assert bool(np.all(unitary.batch_is_member(sp_f3_n1, np.stack(els))))


def test_char2_generators_refused():
    F2 = field_make(2)
    with pytest.raises(UnsupportedConvention):
        unitary.make_generators(HyperbolicSpace(F2, 1, eps=1))


def test_orbit_transitivity(sp_f3_n2):
    gens = unitary.make_generators(sp_f3_n2)
    cx = PosetComplex(spec_for_space(sp_f3_n2, "iu-proj"))
    for p in (1, 2):
        frame = unitary.standard_line_frame(sp_f3_n2, p)
        orbit = unitary.orbit_of_frame(sp_f3_n2, gens, frame)
        assert len(orbit) == len(cx.simplices(p - 1))
        # the orbit is exactly the enumeration
        enumerated = {
            tuple(tuple(int(x) for x in cx.vertices()[i]) for i in s)
            for s in cx.simplices(p - 1)
        }
        assert set(orbit) == enumerated


def test_orbit_of_empty_generators(sp_f3_n2):
    frame = unitary.standard_line_frame(sp_f3_n2, 1)
    orbit = unitary.orbit_of_frame(sp_f3_n2, [], frame)
    assert set(orbit) == {frame}


def test_orbit_stabilizer_products(sp_f3_n2):
    gens = unitary.make_generators(sp_f3_n2)
    order = unitary.group_order(sp_f3_n2)
    for p in (1, 2):
        frame = unitary.standard_line_frame(sp_f3_n2, p)
        orbit = unitary.orbit_of_frame(sp_f3_n2, gens, frame)
        assert order % len(orbit) == 0
        rep = unitary.stabilizer_report(sp_f3_n2, p, samples=10, seed=0)
        assert rep.stab_order * rep.orbit_size == order


def test_g_perm_face_identity(sp_f3_n3):
    # deleting the i-th component of the standard frame is the permuted
    # standard smaller frame, via the block plane permutation
    F = sp_f3_n3.field
    for p in (1, 2, 3):
        frame = unitary.standard_line_frame(sp_f3_n3, p)
        smaller = unitary.standard_line_frame(sp_f3_n3, p - 1) if p > 1 else ()
        for i in range(1, p + 1):
            g = unitary.g_perm(sp_f3_n3, i, p)
            assert unitary.is_member(sp_f3_n3, g)
            ginv = linalg.inverse(F, g)
            moved = unitary.apply_to_line_frame(sp_f3_n3, ginv, smaller) if smaller else ()
            assert frame[: i - 1] + frame[i:] == moved


def test_g_perm_defining_action(sp_f3_n3):
    # g sends the pair (e_{2i-1}, e_{2i}) to (e_{2p-1}, e_{2p})
    F = sp_f3_n3.field
    for p in (2, 3):
        for i in range(1, p + 1):
            g = unitary.g_perm(sp_f3_n3, i, p)
            v = F.matvec(g, sp_f3_n3.basis_vector(2 * i - 1))
            w = F.matvec(g, sp_f3_n3.basis_vector(2 * i))
            assert tuple(v) == sp_f3_n3.basis_vector(2 * p - 1)
            assert tuple(w) == sp_f3_n3.basis_vector(2 * p)


def test_alpha_map_is_conjugation(sp_f3_n3):
    F = sp_f3_n3.field
    rng = random.Random(0)
    sub = HyperbolicSpace(F, 1, sp_f3_n3.eps)
    sub_gens = unitary.make_generators(sub)
    chain = unitary.BSGS(F, [g.matrix for g in sub_gens])
    for p in (2,):
        for i in (1, 2):
            g = unitary.g_perm(sp_f3_n3, i, p)
            ginv = linalg.inverse(F, g)
            for _ in range(25):
                units = tuple(rng.choice([1, 2]) for _ in range(p))
                A = chain.random_element(rng)
                big = unitary.embed_product(sp_f3_n3, units, A)
                new_units, newA = unitary.alpha_map(sp_f3_n3, i, p, units, A)
                expected = unitary.embed_product(sp_f3_n3, new_units, newA)
                conj = F.matmul(F.matmul(g, big), ginv)
                assert np.array_equal(conj, expected)


def test_alpha_map_display_p1(sp_f3_n2):
    # alpha_{1,1}(a, A) = diag(a, conj(a)^{-1}, A)
    F = sp_f3_n2.field
    sub = HyperbolicSpace(F, 1, sp_f3_n2.eps)
    A = unitary.make_generators(sub)[0].matrix
    units, newA = unitary.alpha_map(sp_f3_n2, 1, 1, (2,), A)
    assert units == ()
    assert newA[0, 0] == 2 and newA[1, 1] == F.invert(int(F.conj[2]))
    assert np.array_equal(newA[2:, 2:], A)


def test_alpha_map_is_homomorphism(sp_f3_n2):
    F = sp_f3_n2.field
    rng = random.Random(1)
    for _ in range(25):
        u1 = (rng.choice([1, 2]), rng.choice([1, 2]))
        u2 = (rng.choice([1, 2]), rng.choice([1, 2]))
        _, A1 = unitary.alpha_map(sp_f3_n2, 1, 2, u1)
        _, A2 = unitary.alpha_map(sp_f3_n2, 1, 2, u2)
        prod_units = tuple(int(F.mul[a, b]) for a, b in zip(u1, u2))
        _, A12 = unitary.alpha_map(sp_f3_n2, 1, 2, prod_units)
        assert np.array_equal(F.matmul(A1, A2), A12)


def test_alpha_map_rejects_outsiders(sp_f3_n2):
    with pytest.raises(ValueError):
        unitary.alpha_map(sp_f3_n2, 1, 2, (0, 1))
    with pytest.raises(ValueError):
        unitary.alpha_map(sp_f3_n2, 1, 1, (1,), np.eye(3, dtype=np.int16))


def test_abelianization_examples(sp_f3_n1, sp_f3_n2):
    assert unitary.abelianization(sp_f3_n1) == [3]
    assert unitary.abelianization(sp_f3_n2) == []


def test_abelianization_trivial_group(F3):
    space = HyperbolicSpace(F3, 1, eps=-1)
    assert unitary.abelianization(space, gens=[]) == []


def test_stabilizer_structure_f3(sp_f3_n2):
    rep = unitary.stabilizer_report(sp_f3_n2, 2, samples=60, seed=2)
    assert rep.stab_order == 108
    assert rep.samples_pattern_ok == rep.samples_checked == 60
    assert rep.radical_order == 27
    assert rep.factorization_ok
    assert rep.nprime_pattern_order == 27  # |Lambda|^2 q
    assert rep.nprime_pattern_is_group
    assert rep.nprime_pattern_in_stab
    assert rep.derived_inside_pattern
    # the radical at n = p = 2 is abelian, so its derived subgroup collapses
    assert rep.nprime_derived_order == 1


def test_stabilizer_structure_f3_p1(sp_f3_n2):
    rep = unitary.stabilizer_report(sp_f3_n2, 1, samples=40, seed=3)
    assert rep.stab_order == 51840 // 40
    assert rep.samples_pattern_ok == 40
    assert rep.factorization_ok
    assert rep.radical_order == 27  # q^3 Heisenberg radical


def test_commutator_pattern_holds_at_rank_three(sp_f3_n3):
    # one rank higher the radical is big enough that its derived subgroup
    # fills the displayed pattern exactly
    F = sp_f3_n3.field
    rad = unitary.radical_elements(sp_f3_n3, 2)
    assert len(rad) == 3**7
    derived = unitary.derived_of_elements(F, list(rad))
    pattern = unitary.nprime_pattern_elements(sp_f3_n3, 2)
    assert len(pattern) == 27
    assert {m.tobytes() for m in derived} == {m.tobytes() for m in pattern}


def test_nprime_pattern_elements_preserve_form(sp_f3_n2, sp_f3_n3):
    for space in (sp_f3_n2, sp_f3_n3):
        pattern = unitary.nprime_pattern_elements(space, 2)
        assert bool(np.all(unitary.batch_is_member(space, pattern)))


def test_bsgs_membership_and_uniformity(sp_f3_n1):
    gens = unitary.make_generators(sp_f3_n1)
    chain = unitary.BSGS(sp_f3_n1.field, [g.matrix for g in gens])
    els = unitary.mulclose(sp_f3_n1.field, gens)
    for m in els:
        assert chain.contains(m)
    outside = np.diag([2, 1]).astype(np.int16)  # scales h(e1, e2) by 2
    assert not unitary.is_member(sp_f3_n1, outside)
    assert not chain.contains(outside)
    rng = random.Random(0)
    seen = {chain.random_element(rng).tobytes() for _ in range(600)}
    assert len(seen) == 24  # uniform sampling hits everything quickly
