"""The isometry group of a hyperbolic space: generators, orbits, stabilizers.

Matrices act on column vectors; G is every invertible matrix M with
h(Mx, My) = h(x, y), checked on the basis (M^T . gram . conj(M) = gram).
Generator formulas are elementary transformations in the hyperbolic basis,
derived from the Gram convention; their correctness is pinned by testable
contracts (form preservation, classical order formulas, transitivity on
frames) rather than by any particular normalization.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import linalg
from .fields import FiniteField, FROBENIUS_SQRT, IDENTITY
from .hermitian import HyperbolicSpace, UnsupportedConvention, line_representative
from .posets import BudgetExceeded


def _mat(space: HyperbolicSpace, entries: dict) -> np.ndarray:
    M = np.eye(space.dim, dtype=np.int16)
    for (i, j), v in entries.items():
        M[i, j] = v
    return M


def is_member(space: HyperbolicSpace, M) -> bool:
    """Whether M preserves the form on all basis pairs (hence lies in G)."""
    M = np.asarray(M, dtype=np.int16)
    if M.shape != (space.dim, space.dim):
        return False
    F = space.field
    G = F.matmul(F.matmul(M.T, space.gram), F.conj[M])
    return np.array_equal(G, space.gram)


def batch_is_member(space: HyperbolicSpace, Ms: np.ndarray) -> np.ndarray:
    """Form-preservation mask for a stack of matrices."""
    F = space.field
    MT = np.swapaxes(Ms, -1, -2)
    G = F.batch_matmul(F.batch_matmul(MT, space.gram[None]), F.conj[Ms])
    return np.all(G == space.gram[None], axis=(-2, -1))


@dataclass
class Generator:
    kind: str
    indices: tuple
    param: int
    matrix: np.ndarray


def make_generators(space: HyperbolicSpace) -> list[Generator]:
    """Elementary generating set; every member is verified form-preserving."""
    if space.field.p == 2:
        raise UnsupportedConvention(
            "groups in characteristic 2 need the quadratic-form refinement"
        )
    F = space.field
    n = space.rank
    eps = space.eps
    eps_inv = F.invert(eps)
    lam = sorted(space.form.lambda_)
    alpha = F.primitive_element()
    gens: list[Generator] = []

    def add(kind, indices, param, entries):
        M = _mat(space, entries)
        assert is_member(space, M), (kind, indices, param)
        gens.append(Generator(kind, indices, param, M))

    # additive generators of the form parameter and of the field
    lam_gens = [x for x in lam if x != 0][:1] or []
    if F.e > 1:
        # a spanning set over the prime field
        lam_nonzero = [x for x in lam if x != 0]
        lam_gens = _additive_spanning(F, lam_nonzero)
    field_gens = _additive_spanning(F, list(range(1, F.q)))

    for i in range(n):
        r, s = 2 * i, 2 * i + 1  # 0-based indices of the plane-i basis pair
        add("torus", (i + 1,), alpha, {(r, r): alpha, (s, s): F.invert(int(F.conj[alpha]))})
        for lamv in lam_gens:
            # e_{2i-1} -> e_{2i-1} + lam e_{2i}
            add("shear-lo", (i + 1,), lamv, {(s, r): lamv})
            # e_{2i} -> e_{2i} + (eps lam) e_{2i-1}
            add("shear-hi", (i + 1,), lamv, {(r, s): int(F.mul[eps, lamv])})
        # within-plane rotation: e_{2i-1} -> eps^{-1} e_{2i}, e_{2i} -> e_{2i-1}
        add("rotate", (i + 1,), 0, {(r, r): 0, (s, s): 0, (s, r): eps_inv, (r, s): 1})

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ri, si = 2 * i, 2 * i + 1
            rj, sj = 2 * j, 2 * j + 1
            for a in field_gens:
                ca = int(F.conj[a])
                # e_{2j} -> e_{2j} + a e_{2i-1},  e_{2i} -> e_{2i} - eps conj(a) e_{2j-1}
                add(
                    "eichler-a",
                    (i + 1, j + 1),
                    a,
                    {(ri, sj): a, (rj, si): int(F.neg[F.mul[eps, ca]])},
                )
                # e_{2j} -> e_{2j} + a e_{2i},  e_{2i-1} -> e_{2i-1} - conj(a) e_{2j-1}
                add(
                    "eichler-b",
                    (i + 1, j + 1),
                    a,
                    {(si, sj): a, (rj, ri): int(F.neg[ca])},
                )
    if n >= 2:
        for i in range(n - 1):
            # swap adjacent hyperbolic planes
            r, s = 2 * i, 2 * i + 1
            add(
                "plane-swap",
                (i + 1, i + 2),
                0,
                {
                    (r, r): 0, (s, s): 0, (r + 2, r + 2): 0, (s + 2, s + 2): 0,
                    (r + 2, r): 1, (s + 2, s): 1, (r, r + 2): 1, (s, s + 2): 1,
                },
            )
    if space.field.involution == IDENTITY and eps == 1:
        # hyperplane reflections carry the orthogonal group beyond its
        # rotation subgroup; take v = e_1 + c e_2 with h(v,v) a unit
        for c in (1, F.minus_one):
            v = np.zeros(space.dim, dtype=np.int16)
            v[0], v[1] = 1, c
            hv = space.h(v, v)
            if hv == 0:
                continue
            M = _reflection(space, v)
            if is_member(space, M):
                gens.append(Generator("reflection", (1,), int(c), M))
    return gens


def _additive_spanning(field: FiniteField, values: list[int]) -> list[int]:
    """A minimal subset additively spanning the given subgroup of (F, +)."""
    span = {0}
    out = []
    for v in values:
        if v not in span:
            out.append(v)
            new = set(span)
            for s in span:
                x = int(field.add[s, v])
                while x not in new:
                    new.add(x)
                    x = int(field.add[x, v])
            span = new
    return out


def _reflection(space: HyperbolicSpace, v: np.ndarray) -> np.ndarray:
    F = space.field
    hv = space.h(v, v)
    c = F.invert(hv)
    M = np.eye(space.dim, dtype=np.int16)
    for j in range(space.dim):
        e = np.zeros(space.dim, dtype=np.int16)
        e[j] = 1
        coef = F.mul[F.mul[2 % F.p if F.e == 1 else F.add[1, 1], space.h(e, v)], c]
        M[:, j] = F.sub[M[:, j], F.mul[int(coef), v]]
    return M


def generator_matrices(gens) -> list[np.ndarray]:
    return [g.matrix if isinstance(g, Generator) else np.asarray(g, dtype=np.int16) for g in gens]


# -- closure and BSGS ---------------------------------------------------------


def mulclose(field: FiniteField, gens, maxsize: int | None = None) -> list[np.ndarray]:
    """Batched BFS closure of a matrix set; returns all elements."""
    mats = generator_matrices(gens)
    d = mats[0].shape[0]
    seen: dict[bytes, np.ndarray] = {}
    eye = np.eye(d, dtype=np.int16)
    seen[eye.tobytes()] = eye
    frontier = []
    for m in mats:
        key = m.astype(np.int16).tobytes()
        if key not in seen:
            seen[key] = m.astype(np.int16)
            frontier.append(m.astype(np.int16))
    while frontier:
        batch = np.stack(frontier)
        frontier = []
        for m in mats:
            prods = field.batch_matmul(batch, m).astype(np.int16)
            for P in prods:
                key = P.tobytes()
                if key not in seen:
                    seen[key] = P
                    frontier.append(P)
                    if maxsize is not None and len(seen) > maxsize:
                        raise BudgetExceeded(
                            f"closure exceeded {maxsize} elements", estimate=len(seen)
                        )
    return list(seen.values())


class BSGS:
    """Deterministic Schreier-Sims chain on the column-vector action."""

    def __init__(self, field: FiniteField, gens, base_hint=None):
        self.field = field
        mats = generator_matrices(gens)
        self.dim = mats[0].shape[0] if mats else 0
        self.levels: list[dict] = []
        self._base_hint = [tuple(b) for b in (base_hint or [])]
        for m in mats:
            self.add(m)

    # points are tuples of ints (column vectors)
    def act(self, M, point):
        return tuple(int(x) for x in self.field.matvec(M, np.asarray(point, dtype=np.int16)))

    def _new_base_point(self, h):
        for b in self._base_hint:
            if self.act(h, b) != b:
                if all(lv["b"] != b for lv in self.levels):
                    return b
        for j in range(self.dim):
            e = tuple(1 if t == j else 0 for t in range(self.dim))
            if self.act(h, e) != e:
                return e
        raise AssertionError("non-identity matrix moves some basis vector")

    def _strip(self, g, start=0):
        g = np.asarray(g, dtype=np.int16)
        for i in range(start, len(self.levels)):
            lv = self.levels[i]
            x = self.act(g, lv["b"])
            t = lv["transversal"].get(x)
            if t is None:
                return g, i
            g = self.field.matmul(t[1], g).astype(np.int16)
        if np.array_equal(g, np.eye(self.dim, dtype=np.int16)):
            return None, len(self.levels)
        return g, len(self.levels)

    def contains(self, M) -> bool:
        h, _ = self._strip(M)
        return h is None

    def add(self, g) -> bool:
        """Incorporate a matrix; True if the group grew."""
        h, lev = self._strip(g)
        if h is None:
            return False
        if lev == len(self.levels):
            b = self._new_base_point(h)
            eye = np.eye(self.dim, dtype=np.int16)
            self.levels.append({"b": b, "gens": [], "transversal": {b: (eye, eye)}})
        self.levels[lev]["gens"].append(h)
        self._schreier_sims(lev)
        return True

    def _level_gens(self, i):
        out = []
        for j in range(i, len(self.levels)):
            out.extend(self.levels[j]["gens"])
        return out

    def _rebuild_orbit(self, i):
        lv = self.levels[i]
        F = self.field
        eye = np.eye(self.dim, dtype=np.int16)
        trans = {lv["b"]: (eye, eye)}
        gens = self._level_gens(i)
        ginvs = [linalg.inverse(F, g) for g in gens]
        frontier = [lv["b"]]
        while frontier:
            nxt = []
            for x in frontier:
                tx, tx_inv = trans[x]
                for g, ginv in zip(gens, ginvs):
                    y = self.act(g, x)
                    if y not in trans:
                        ty = F.matmul(g, tx).astype(np.int16)
                        trans[y] = (ty, F.matmul(tx_inv, ginv).astype(np.int16))
                        nxt.append(y)
            frontier = nxt
        lv["transversal"] = trans

    def _schreier_sims(self, start_level):
        i = start_level
        while i >= 0:
            self._rebuild_orbit(i)
            lv = self.levels[i]
            gens = self._level_gens(i)
            restarted = False
            for x, (tx, _) in list(lv["transversal"].items()):
                for g in gens:
                    y = self.act(g, x)
                    ty, ty_inv = lv["transversal"][y]
                    schreier = self.field.matmul(
                        ty_inv, self.field.matmul(g, tx)
                    ).astype(np.int16)
                    h, lev = self._strip(schreier, i + 1)
                    if h is not None:
                        if lev == len(self.levels):
                            b = self._new_base_point(h)
                            eye = np.eye(self.dim, dtype=np.int16)
                            self.levels.append(
                                {"b": b, "gens": [], "transversal": {b: (eye, eye)}}
                            )
                        self.levels[lev]["gens"].append(h)
                        i = lev
                        restarted = True
                        break
                if restarted:
                    break
            if not restarted:
                i -= 1

    def order(self) -> int:
        out = 1
        for lv in self.levels:
            out *= len(lv["transversal"])
        return out

    def random_element(self, rng: random.Random) -> np.ndarray:
        """Uniformly random element (product of uniform transversal reps)."""
        M = np.eye(self.dim, dtype=np.int16)
        for lv in self.levels:
            key = rng.choice(sorted(lv["transversal"]))
            M = self.field.matmul(M, lv["transversal"][key][0]).astype(np.int16)
        return M

    def strong_generators(self) -> list[np.ndarray]:
        return self._level_gens(0)


def group_order(space: HyperbolicSpace, gens=None, budget: int = 10**12) -> int:
    """|<gens>| by a stabilizer chain on the vector action."""
    gens = make_generators(space) if gens is None else gens
    mats = generator_matrices(gens)
    if not mats:
        return 1
    chain = BSGS(space.field, mats, base_hint=_standard_base(space))
    order = chain.order()
    if order > budget:
        raise BudgetExceeded(f"group order {order} exceeds budget {budget}")
    return order


def _standard_base(space: HyperbolicSpace):
    return [space.basis_vector(i + 1) for i in range(space.dim)]


def classical_order_formula(space: HyperbolicSpace) -> int:
    """Textbook order of the full isometry group of the hyperbolic form."""
    F, n = space.field, space.rank
    q = F.q
    if F.involution == FROBENIUS_SQRT:
        q0 = F.p ** (F.e // 2)
        m = 2 * n
        out = q0 ** (m * (m - 1) // 2)
        for i in range(1, m + 1):
            out *= q0**i - (-1) ** i
        return out
    if space.eps == F.minus_one and F.p != 2:
        out = q ** (n * n)
        for i in range(1, n + 1):
            out *= q ** (2 * i) - 1
        return out
    if space.eps == 1:
        out = 2 * q ** (n * (n - 1)) * (q**n - 1)
        for i in range(1, n):
            out *= q ** (2 * i) - 1
        return out
    raise UnsupportedConvention("no classical order formula for this configuration")


# -- frames and orbits --------------------------------------------------------


def standard_line_frame(space: HyperbolicSpace, p: int) -> tuple:
    """(<e_1>, <e_3>, ..., <e_{2p-1}>)."""
    if not 1 <= p <= space.rank:
        raise ValueError("frame length must lie in 1..n")
    return tuple(
        line_representative(space.field, space.basis_vector(2 * i + 1))
        for i in range(p)
    )


def apply_to_line_frame(space: HyperbolicSpace, M, frame) -> tuple:
    F = space.field
    return tuple(
        line_representative(F, F.matvec(M, np.asarray(v, dtype=np.int16)))
        for v in frame
    )


def orbit_of_frame(
    space: HyperbolicSpace,
    gens,
    frame,
    budget: int = 5_000_000,
    want_transversal: bool = False,
):
    """BFS orbit of a line frame; optionally with a transversal of matrices."""
    mats = generator_matrices(gens)
    frame = tuple(tuple(int(x) for x in v) for v in frame)
    eye = np.eye(space.dim, dtype=np.int16)
    orbit: dict[tuple, np.ndarray | None] = {frame: eye if want_transversal else None}
    frontier = [frame]
    while frontier:
        nxt = []
        for x in frontier:
            tx = orbit[x]
            for m in mats:
                y = apply_to_line_frame(space, m, x)
                if y not in orbit:
                    orbit[y] = (
                        space.field.matmul(m, tx).astype(np.int16)
                        if want_transversal
                        else None
                    )
                    nxt.append(y)
                    if len(orbit) > budget:
                        raise BudgetExceeded("orbit exceeded budget", estimate=len(orbit))
        frontier = nxt
    return orbit


# -- the plane permutations and unit-merging maps -----------------------------


def g_perm(space: HyperbolicSpace, i: int, p: int) -> np.ndarray:
    """Block permutation: plane i moves to slot p, planes i+1..p shift down."""
    n = space.rank
    if not (1 <= i <= p <= n):
        raise ValueError("need 1 <= i <= p <= n")
    perm = list(range(n))  # plane j-1 (0-based) -> perm[j-1]
    perm[i - 1] = p - 1
    for l in range(i + 1, p + 1):
        perm[l - 1] = l - 2
    M = np.zeros((space.dim, space.dim), dtype=np.int16)
    for j in range(n):
        M[2 * perm[j], 2 * j] = 1
        M[2 * perm[j] + 1, 2 * j + 1] = 1
    assert is_member(space, M)
    return M


def torus_block(field: FiniteField, a: int) -> np.ndarray:
    return np.array([[a, 0], [0, field.invert(int(field.conj[a]))]], dtype=np.int16)


def embed_product(space: HyperbolicSpace, units, A=None) -> np.ndarray:
    """diag(t(a_1), ..., t(a_p), A) as a matrix of the big group."""
    F = space.field
    p = len(units)
    M = np.eye(space.dim, dtype=np.int16)
    for i, a in enumerate(units):
        M[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = torus_block(F, int(a))
    if A is not None and np.asarray(A).size:
        A = np.asarray(A, dtype=np.int16)
        M[2 * p :, 2 * p :] = A
    return M


def alpha_map(space: HyperbolicSpace, i: int, p: int, units, A=None):
    """Merge the i-th unit into the block: the inner automorphism by g_perm.

    Input is an element of units^p x G_{n-p} given as (a_1..a_p, A); output
    the reshuffled (a_1..^a_i..a_p, diag(t(a_i), A)) of units^{p-1} x
    G_{n-p+1}, which equals conjugation by g_perm(i, p) on the embeddings.
    """
    units = tuple(int(a) for a in units)
    if len(units) != p:
        raise ValueError("need exactly p units")
    F = space.field
    for a in units:
        if a == 0:
            raise ValueError("torus parameters must be units")
    sub_dim = 2 * (space.rank - p)
    if A is None:
        A = np.zeros((0, 0), dtype=np.int16)
    A = np.asarray(A, dtype=np.int16)
    if A.shape != (sub_dim, sub_dim):
        raise ValueError("block has the wrong size for G_{n-p}")
    if sub_dim:
        sub_space = HyperbolicSpace(F, space.rank - p, space.eps)
        if not is_member(sub_space, A):
            raise ValueError("block does not preserve the small form")
    new_units = units[: i - 1] + units[i:]
    newA = np.zeros((sub_dim + 2, sub_dim + 2), dtype=np.int16)
    newA[:2, :2] = torus_block(F, units[i - 1])
    if sub_dim:
        newA[2:, 2:] = A
    return new_units, newA


# -- derived subgroup, abelianization ----------------------------------------


def commutator(field: FiniteField, a, b) -> np.ndarray:
    ab = field.matmul(a, b)
    ba = field.matmul(b, a)
    return field.matmul(ab, linalg.inverse(field, ba)).astype(np.int16)


def derived_subgroup(field: FiniteField, gens, base_hint=None) -> BSGS:
    """BSGS of [G, G]: normal closure of generator commutators."""
    mats = generator_matrices(gens)
    seeds = []
    for a, b in itertools.combinations(mats, 2):
        seeds.append(commutator(field, a, b))
    chain = BSGS(field, seeds, base_hint=base_hint)
    changed = True
    while changed:
        changed = False
        for h in list(chain.strong_generators()):
            for g in mats:
                c = field.matmul(field.matmul(g, h), linalg.inverse(field, g)).astype(np.int16)
                if chain.add(c):
                    changed = True
    return chain


@dataclass
class AbelianQuotient:
    """G/[G,G] as explicit coset representatives with multiplication."""

    field: FiniteField
    reps: list[np.ndarray]
    derived: BSGS
    order: int = 0

    def __post_init__(self):
        self.order = len(self.reps)

    def coset_index(self, M) -> int:
        F = self.field
        M = np.asarray(M, dtype=np.int16)
        for i, r in enumerate(self.reps):
            if self.derived.contains(F.matmul(M, linalg.inverse(F, r))):
                return i
        raise KeyError("matrix not in the group")

    def multiply(self, i: int, j: int) -> int:
        return self.coset_index(self.field.matmul(self.reps[i], self.reps[j]))

    def element_order(self, i: int) -> int:
        F = self.field
        M = self.reps[i]
        acc = np.array(M)
        k = 1
        while not self.derived.contains(acc):
            acc = F.matmul(acc, M).astype(np.int16)
            k += 1
        return k

    def invariant_factors(self) -> list[int]:
        return _invariant_factors_from_orders(
            self.order, [self.element_order(i) for i in range(self.order)]
        )


def abelianization_quotient(field: FiniteField, gens, base_hint=None, index_budget: int = 20_000) -> AbelianQuotient:
    mats = generator_matrices(gens)
    G = BSGS(field, mats, base_hint=base_hint)
    D = derived_subgroup(field, mats, base_hint=base_hint)
    index = G.order() // D.order()
    if index > index_budget:
        raise BudgetExceeded(f"abelianization index {index} exceeds budget")
    dim = mats[0].shape[0]
    reps = [np.eye(dim, dtype=np.int16)]
    frontier = [reps[0]]
    while frontier:
        nxt = []
        for r in frontier:
            for m in mats:
                x = field.matmul(r, m).astype(np.int16)
                if not any(
                    D.contains(field.matmul(x, linalg.inverse(field, s)))
                    for s in reps
                ):
                    reps.append(x)
                    nxt.append(x)
        frontier = nxt
    assert len(reps) == index, "coset enumeration disagrees with the order ratio"
    return AbelianQuotient(field=field, reps=reps, derived=D)


def abelianization(space: HyperbolicSpace, gens=None) -> list[int]:
    """Invariant factors of G/[G,G] (empty list for a perfect group)."""
    gens = make_generators(space) if gens is None else gens
    if not generator_matrices(gens):
        return []
    Q = abelianization_quotient(space.field, gens, base_hint=_standard_base(space))
    return Q.invariant_factors()


def _invariant_factors_from_orders(order: int, orders: list[int]) -> list[int]:
    """Invariant factors of a finite abelian group from its element orders.

    The rank of the ell^j-torsion layer is log_ell #{x : x^{ell^j} = 1};
    layer differences count cyclic components of each prime-power order, and
    aligning the per-prime components largest-first multiplies them into the
    invariant factors.
    """
    if order == 1:
        return []
    per_prime: dict[int, list[int]] = {}
    for ell in _prime_factors(order):
        layers = [0]
        while True:
            j = len(layers)
            cnt = sum(1 for o in orders if (ell**j) % o == 0)
            lam = 0
            while ell**lam < cnt:
                lam += 1
            assert ell**lam == cnt, "torsion layer size is not a power of ell"
            if lam == layers[-1]:
                break
            layers.append(lam)
        ge_counts = [layers[j] - layers[j - 1] for j in range(1, len(layers))]
        mults: list[int] = []
        for j, c in enumerate(ge_counts):
            exact = c - (ge_counts[j + 1] if j + 1 < len(ge_counts) else 0)
            mults.extend([ell ** (j + 1)] * exact)
        mults.sort(reverse=True)
        per_prime[ell] = mults
    width = max(len(v) for v in per_prime.values())
    out = []
    for k in range(width):
        f = 1
        for mults in per_prime.values():
            if k < len(mults):
                f *= mults[k]
        out.append(f)
    out.sort()
    return out


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- stabilizer structure ------------------------------------------------------


def stab_pattern_ok(space: HyperbolicSpace, p: int, M) -> bool:
    """Block pattern of the stabilizer of the standard p-line frame:
    column 2i-1 is a unit multiple of e_{2i-1}, row 2i is the matching
    conj-inverse unit times e_2i, and the lower-right block preserves the
    small form."""
    F = space.field
    M = np.asarray(M, dtype=np.int16)
    d = space.dim
    if M.shape != (d, d):
        return False
    for i in range(p):
        r, s = 2 * i, 2 * i + 1
        a = int(M[r, r])
        if a == 0:
            return False
        col = np.zeros(d, dtype=np.int16)
        col[r] = a
        if not np.array_equal(M[:, r], col):
            return False
        row = np.zeros(d, dtype=np.int16)
        row[s] = F.invert(int(F.conj[a]))
        if not np.array_equal(M[s, :], row):
            return False
    if p < space.rank:
        sub = HyperbolicSpace(F, space.rank - p, space.eps)
        if not is_member(sub, M[2 * p :, 2 * p :]):
            return False
    return True


def _pattern_free_positions(space: HyperbolicSpace, p: int) -> list[tuple[int, int]]:
    """Free entries of the radical pattern: unit-diagonal, identity lower
    block, stars only at (odd row <= 2p, even col <= 2p), (odd row <= 2p,
    col > 2p) and (row > 2p, even col <= 2p)."""
    d = space.dim
    pos = []
    for i in range(p):
        r = 2 * i
        for j in range(p):
            pos.append((r, 2 * j + 1))
        for c in range(2 * p, d):
            pos.append((r, c))
    for r in range(2 * p, d):
        for j in range(p):
            pos.append((r, 2 * j + 1))
    return pos


def radical_elements(space: HyperbolicSpace, p: int, budget: int = 3_000_000) -> np.ndarray:
    """All form-preserving matrices matching the radical pattern (a_i = 1,
    identity block): brute-force over the free entries, batch-filtered."""
    F = space.field
    pos = _pattern_free_positions(space, p)
    total = F.q ** len(pos)
    if total > budget:
        raise BudgetExceeded(
            f"radical pattern has {total} candidates, budget {budget}"
        )
    d = space.dim
    cands = np.tile(np.eye(d, dtype=np.int16), (total, 1, 1))
    values = np.array(
        np.meshgrid(*[np.arange(F.q, dtype=np.int16)] * len(pos), indexing="ij")
    ).reshape(len(pos), total)
    for k, (r, c) in enumerate(pos):
        cands[:, r, c] = values[k]
    good = batch_is_member(space, cands)
    return cands[good]


def nprime_pattern_elements(space: HyperbolicSpace, p: int) -> np.ndarray:
    """The displayed commutator shapes: unipotent, within-plane entries from
    the form parameter, opposite cross-plane entries conj-paired, all other
    off-diagonal entries zero."""
    F = space.field
    eps_inv = F.invert(space.eps)
    lam = sorted(space.form.lambda_)
    d = space.dim
    pairs = list(itertools.combinations(range(p), 2))
    out = []
    for diag_vals in itertools.product(lam, repeat=p):
        for ts in itertools.product(range(F.q), repeat=len(pairs)):
            M = np.eye(d, dtype=np.int16)
            for i in range(p):
                M[2 * i, 2 * i + 1] = diag_vals[i]
            for (i, j), t in zip(pairs, ts):
                M[2 * i, 2 * j + 1] = t
                M[2 * j, 2 * i + 1] = int(F.neg[F.mul[eps_inv, F.conj[t]]])
            out.append(M)
    return np.array(out, dtype=np.int16)


def _greedy_generators(field: FiniteField, elements: list[np.ndarray]) -> list[np.ndarray]:
    gens: list[np.ndarray] = []
    have = {np.eye(elements[0].shape[0], dtype=np.int16).tobytes()}
    for M in elements:
        if M.tobytes() not in have:
            gens.append(M)
            have = {x.tobytes() for x in mulclose(field, gens)}
    return gens


def derived_of_elements(field: FiniteField, elements: list[np.ndarray]) -> list[np.ndarray]:
    """Derived subgroup of a small explicitly-listed group."""
    if len(elements) <= 1:
        return [np.eye(elements[0].shape[0] if elements else 1, dtype=np.int16)]
    gens = _greedy_generators(field, elements)
    seeds = [commutator(field, a, b) for a, b in itertools.combinations(gens, 2)]
    closure = {m.tobytes(): m for m in mulclose(field, seeds or [np.eye(gens[0].shape[0], dtype=np.int16)])}
    changed = True
    while changed:
        changed = False
        for g in gens:
            ginv = linalg.inverse(field, g)
            for m in list(closure.values()):
                c = field.matmul(field.matmul(g, m), ginv).astype(np.int16)
                if c.tobytes() not in closure:
                    closure = {m2.tobytes(): m2 for m2 in mulclose(field, list(closure.values()) + [c])}
                    changed = True
    return list(closure.values())


@dataclass
class StabilizerReport:
    p: int
    group_order: int
    orbit_size: int
    stab_order: int
    unit_factor: int
    sub_group_order: int
    radical_order: int
    factorization_ok: bool
    samples_checked: int
    samples_pattern_ok: int
    nprime_pattern_order: int
    nprime_pattern_is_group: bool
    nprime_pattern_in_stab: bool
    nprime_derived_order: int
    derived_matches_pattern: bool
    derived_inside_pattern: bool

    def to_dict(self) -> dict:
        return {k: (v if not isinstance(v, (np.integer,)) else int(v)) for k, v in self.__dict__.items()}


def stabilizer_report(
    space: HyperbolicSpace, p: int, samples: int = 200, seed: int = 0
) -> StabilizerReport:
    """Order bookkeeping and pattern checks for the standard p-frame stabilizer."""
    F = space.field
    gens = make_generators(space)
    mats = generator_matrices(gens)
    frame = standard_line_frame(space, p)
    orbit = orbit_of_frame(space, gens, frame, want_transversal=True)
    chain = BSGS(F, mats, base_hint=_standard_base(space))
    g_order = chain.order()
    assert g_order % len(orbit) == 0, "orbit size must divide the group order"
    stab_order = g_order // len(orbit)

    rng = random.Random(seed)
    ok = 0
    for _ in range(samples):
        g = chain.random_element(rng)
        x = apply_to_line_frame(space, g, frame)
        t = orbit[x]
        s = F.matmul(linalg.inverse(F, t), g).astype(np.int16)
        assert apply_to_line_frame(space, s, frame) == frame, "transversal sampling broke"
        if stab_pattern_ok(space, p, s):
            ok += 1

    radical = radical_elements(space, p)
    rad_order = len(radical)
    if space.rank - p >= 1:
        sub_space = HyperbolicSpace(F, space.rank - p, space.eps)
        sub_order = group_order(sub_space)
    else:
        sub_order = 1
    units = F.q - 1
    factor_ok = stab_order == (units**p) * sub_order * rad_order

    npat = nprime_pattern_elements(space, p)
    npat_keys = {m.tobytes() for m in npat}
    closure = mulclose(F, list(npat)) if len(npat) else []
    npat_group = len(closure) == len(npat)
    npat_member = bool(np.all(batch_is_member(space, npat))) and all(
        stab_pattern_ok(space, p, m) for m in npat[: min(len(npat), 64)]
    )

    derived = derived_of_elements(F, list(radical))
    derived_keys = {m.tobytes() for m in derived}
    inside = derived_keys <= npat_keys
    matches = derived_keys == npat_keys

    return StabilizerReport(
        p=p,
        group_order=g_order,
        orbit_size=len(orbit),
        stab_order=stab_order,
        unit_factor=units**p,
        sub_group_order=sub_order,
        radical_order=rad_order,
        factorization_ok=factor_ok,
        samples_checked=samples,
        samples_pattern_ok=ok,
        nprime_pattern_order=len(npat),
        nprime_pattern_is_group=npat_group,
        nprime_pattern_in_stab=npat_member,
        nprime_derived_order=len(derived),
        derived_matches_pattern=matches,
        derived_inside_pattern=inside,
    )
