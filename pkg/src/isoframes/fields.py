"""Finite fields F_q with an involution, via precomputed operation tables.

Elements are integer codes 0..q-1.  The code of an element is the base-p
encoding of its coefficients over the canonical modulus, least significant
first, so for prime fields the code is just the residue.  The modulus is the
lexicographically smallest monic irreducible polynomial of the right degree,
which makes every serialized enumeration reproducible across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

IDENTITY = "identity"
FROBENIUS_SQRT = "frobenius-sqrt"

INVOLUTIONS = (IDENTITY, FROBENIUS_SQRT)

_MAX_Q = 512


class ConfigurationError(ValueError):
    """Inconsistent field or form configuration."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_mul(a: tuple, b: tuple, p: int) -> tuple:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return tuple(out)


def _poly_mod(a: tuple, modulus: tuple, p: int) -> tuple:
    """Reduce a modulo a monic polynomial, returning deg(modulus) coefficients."""
    a = list(a)
    e = len(modulus) - 1
    if len(a) < e:
        a += [0] * (e - len(a))
    for i in range(len(a) - 1, e - 1, -1):
        c = a[i]
        if c:
            for j in range(e + 1):
                a[i - e + j] = (a[i - e + j] - c * modulus[j]) % p
    return tuple(a[:e])


def _monic_polys(degree: int, p: int):
    for coeffs in itertools.product(range(p), repeat=degree):
        yield coeffs + (1,)


def _is_irreducible(poly: tuple, p: int) -> bool:
    degree = len(poly) - 1
    if degree == 1:
        return True
    for d in range(1, degree // 2 + 1):
        for div in _monic_polys(d, p):
            if not any(_poly_mod(poly, div, p)):
                return False
    return True


@lru_cache(maxsize=None)
def canonical_modulus(p: int, e: int) -> tuple:
    """Lexicographically smallest monic irreducible of degree e over F_p."""
    if e == 1:
        return (0, 1)
    for poly in _monic_polys(e, p):
        if _is_irreducible(poly, p):
            return poly
    raise AssertionError("no irreducible polynomial found")


@dataclass(frozen=True)
class FieldSpec:
    """Construction parameters of a field with involution."""

    p: int
    e: int
    involution: str = IDENTITY

    @property
    def q(self) -> int:
        return self.p**self.e

    def validate(self) -> None:
        if not is_prime(self.p):
            raise ConfigurationError(f"characteristic {self.p} is not prime")
        if self.e < 1:
            raise ConfigurationError(f"extension degree {self.e} < 1")
        if self.involution not in INVOLUTIONS:
            raise ConfigurationError(f"unknown involution {self.involution!r}")
        if self.involution == FROBENIUS_SQRT and self.e % 2 != 0:
            raise ConfigurationError(
                "frobenius-sqrt involution needs an even extension degree"
            )
        if self.q > _MAX_Q:
            raise ConfigurationError(f"q = {self.q} exceeds the table budget {_MAX_Q}")


class FiniteField:
    """F_q with involution; all arithmetic through q x q numpy tables.

    The tables `add`, `sub`, `mul` are indexed elementwise and broadcast, so
    `F.mul[A, B]` multiplies whole arrays of codes at once.
    """

    def __init__(self, p: int, e: int = 1, involution: str = IDENTITY):
        spec = FieldSpec(p, e, involution)
        spec.validate()
        self.spec = spec
        self.p, self.e, self.q = p, e, spec.q
        self.involution = involution
        self.modulus = canonical_modulus(p, e)

        q = self.q
        codes = [self._decode(c) for c in range(q)]
        add = np.zeros((q, q), dtype=np.int16)
        mul = np.zeros((q, q), dtype=np.int16)
        for a in range(q):
            for b in range(a, q):
                s = self._encode(tuple((x + y) % p for x, y in zip(codes[a], codes[b])))
                m = self._encode(_poly_mod(_poly_mul(codes[a], codes[b], p), self.modulus, p))
                add[a, b] = add[b, a] = s
                mul[a, b] = mul[b, a] = m
        self.add = add
        self.mul = mul
        self.neg = np.array(
            [self._encode(tuple((-x) % p for x in codes[a])) for a in range(q)],
            dtype=np.int16,
        )
        self.sub = add[:, self.neg]
        inv = np.zeros(q, dtype=np.int16)
        for a in range(1, q):
            inv[a] = int(np.where(mul[a] == 1)[0][0])
        self._inv = inv
        if involution == IDENTITY:
            self.conj = np.arange(q, dtype=np.int16)
        else:
            k = p ** (e // 2)
            self.conj = np.array([self.power(a, k) for a in range(q)], dtype=np.int16)
        self.zero = 0
        self.one = 1
        self.minus_one = int(self.neg[1])

    def _decode(self, code: int) -> tuple:
        out = []
        for _ in range(self.e):
            out.append(code % self.p)
            code //= self.p
        return tuple(out)

    def _encode(self, coeffs: tuple) -> int:
        code = 0
        for c in reversed(coeffs[: self.e]):
            code = code * self.p + c
        return code

    def __repr__(self):
        return f"FiniteField(p={self.p}, e={self.e}, involution={self.involution!r})"

    def invert(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inversion of zero")
        return int(self._inv[a])

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.invert(a), -k
        out, base = 1, a
        while k:
            if k & 1:
                out = int(self.mul[out, base])
            base = int(self.mul[base, base])
            k >>= 1
        return out

    @property
    def elements(self) -> range:
        return range(self.q)

    @property
    def units(self) -> range:
        return range(1, self.q)

    def element_order(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative order")
        x, k = a, 1
        while x != 1:
            x = int(self.mul[x, a])
            k += 1
        return k

    def primitive_element(self) -> int:
        for a in self.units:
            if self.element_order(a) == self.q - 1:
                return a
        raise AssertionError("no primitive element")

    # -- bulk helpers ------------------------------------------------------

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product over the field (2-d arrays of codes)."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.e == 1:
            return ((A @ B) % self.p).astype(np.int16)
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int16)
        for k in range(A.shape[1]):
            out = self.add[out, self.mul[A[:, k][:, None], B[k, :][None, :]]]
        return out

    def batch_matmul(self, A, B) -> np.ndarray:
        """Product over a stack of matrices; leading axes broadcast."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.e == 1:
            return (A @ B) % self.p
        out = np.zeros(np.broadcast_shapes(A.shape[:-2], B.shape[:-2]) + (A.shape[-2], B.shape[-1]), dtype=np.int16)
        for k in range(A.shape[-1]):
            out = self.add[out, self.mul[A[..., :, k, None], B[..., None, k, :]]]
        return out

    def matvec(self, A, v) -> np.ndarray:
        return self.matmul(np.asarray(A), np.asarray(v).reshape(-1, 1)).reshape(-1)


def field_make(p: int, e: int = 1, involution: str = IDENTITY) -> FiniteField:
    """Build F_{p^e} with the requested involution (validated)."""
    return FiniteField(p, e, involution)


def excluded_from_frame_acyclicity(field: FiniteField) -> bool:
    """The two-element field falls outside the connectivity hypotheses for
    unimodular-frame posets; callers refuse theorem checks over it."""
    return field.q == 2


def norm_one_units(field: FiniteField) -> frozenset:
    """Units x with x * conj(x) = 1."""
    return frozenset(
        a for a in field.units if int(field.mul[a, field.conj[a]]) == 1
    )


def lambda_set(field: FiniteField, eps: int) -> frozenset:
    """The maximal form parameter: all r with eps^{-1} * conj(r) = -r."""
    if int(field.mul[eps, field.conj[eps]]) != 1:
        raise ConfigurationError("eps must satisfy eps * conj(eps) = 1")
    eps_inv = field.invert(eps)
    return frozenset(
        r
        for r in field.elements
        if int(field.mul[eps_inv, field.conj[r]]) == int(field.neg[r])
    )


def fixed_subfield(field: FiniteField) -> frozenset:
    """Elements fixed by the involution (a subfield)."""
    return frozenset(a for a in field.elements if int(field.conj[a]) == a)


@dataclass(frozen=True)
class FormParams:
    """eps together with the derived scalar sets of a hermitian form."""

    eps: int
    lambda_: frozenset
    fixed: frozenset

    @classmethod
    def make(cls, field: FiniteField, eps: int) -> "FormParams":
        return cls(eps=eps, lambda_=lambda_set(field, eps), fixed=fixed_subfield(field))
