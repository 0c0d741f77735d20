"""Binary extension field arithmetic GF(2^m) on int-encoded polynomials.

Field elements are m-bit integers; bit i is the coefficient of x^i.  The
reduction polynomial is an (m+1)-bit integer with top and bottom bits set,
verified irreducible at construction for m <= 32.  Limb vectors pack an
r*m-bit string little-endian: limb 0 holds the lowest-order bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence


class FieldError(ValueError):
    pass


def clmul(a: int, b: int) -> int:
    """Carryless (GF(2)[x]) product of two polynomials."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    return acc


def pmod(a: int, mod: int) -> int:
    """Polynomial remainder of a modulo mod over GF(2)."""
    dm = mod.bit_length()
    while a.bit_length() >= dm:
        a ^= mod << (a.bit_length() - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Exhaustive trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for low in range(1 << d):
            divisor = (1 << d) | low
            if pmod(poly, divisor) == 0:
                return False
    return True


_MUL_TABLES: dict = {}


@lru_cache(maxsize=None)
def default_poly(m: int) -> int:
    """Lexicographically smallest irreducible of degree m with constant term."""
    if not 1 <= m <= 32:
        raise FieldError("default polynomials are tabulated for 1 <= m <= 32")
    for cand in range((1 << m) | 1, 1 << (m + 1), 2):
        if is_irreducible(cand):
            return cand
    raise AssertionError("unreachable: irreducibles exist for every degree")


@dataclass(frozen=True)
class FieldParams:
    """GF(2^m) with a pinned reduction polynomial."""

    m: int
    reduction_poly: int

    def __post_init__(self):
        if self.m < 1:
            raise FieldError("m must be >= 1")
        p = self.reduction_poly
        if p.bit_length() != self.m + 1 or not (p & 1):
            raise FieldError("reduction polynomial must have top and bottom bits set")
        if self.m <= 32 and not is_irreducible(p):
            raise FieldError(f"0x{p:x} is reducible over GF(2)")

    @classmethod
    def default(cls, m: int) -> "FieldParams":
        return cls(m, default_poly(m))

    # int fast path -------------------------------------------------------

    def mul(self, a: int, b: int) -> int:
        return pmod(clmul(a, b), self.reduction_poly)

    def pow(self, a: int, e: int) -> int:
        acc = 1
        base = a
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no inverse")
        return self.pow(a, (1 << self.m) - 2)

    def inner(self, u: Sequence[int], v: Sequence[int]) -> int:
        if len(u) != len(v):
            raise FieldError(f"length mismatch: {len(u)} vs {len(v)}")
        acc = 0
        for a, b in zip(u, v):
            acc ^= self.mul(a, b)
        return acc

    def mul_table(self):
        """Dense 2^m x 2^m product table (numpy), cached; m <= 8 only."""
        import numpy as np
        if self.m > 8:
            raise FieldError("dense multiplication tables are limited to m <= 8")
        cached = _MUL_TABLES.get((self.m, self.reduction_poly))
        if cached is None:
            size = 1 << self.m
            cached = np.array([[self.mul(a, b) for b in range(size)] for a in range(size)],
                              dtype=np.int64)
            _MUL_TABLES[(self.m, self.reduction_poly)] = cached
        return cached

    def to_json(self) -> dict:
        return {"m": self.m, "poly": hex(self.reduction_poly)}

    @classmethod
    def from_json(cls, obj: dict) -> "FieldParams":
        return cls(obj["m"], int(obj["poly"], 16))


@dataclass(frozen=True)
class FieldElem:
    value: int
    params: FieldParams

    def __post_init__(self):
        if not 0 <= self.value < (1 << self.params.m):
            raise FieldError(f"value {self.value} outside GF(2^{self.params.m})")

    def __add__(self, other: "FieldElem") -> "FieldElem":
        _same_field(self, other)
        return FieldElem(self.value ^ other.value, self.params)

    __sub__ = __add__

    def __mul__(self, other: "FieldElem") -> "FieldElem":
        return gf_mul(self, other)


def _same_field(a: FieldElem, b: FieldElem) -> None:
    if a.params != b.params:
        raise FieldError("params mismatch")


def gf_mul(a: FieldElem, b: FieldElem) -> FieldElem:
    _same_field(a, b)
    return FieldElem(a.params.mul(a.value, b.value), a.params)


def gf_inv(a: FieldElem) -> FieldElem:
    return FieldElem(a.params.inv(a.value), a.params)


def vec_inner_product(u: Sequence[FieldElem | int], v: Sequence[FieldElem | int],
                      params: FieldParams) -> FieldElem:
    """XOR-accumulated sum of limbwise field products."""
    uu = [e.value if isinstance(e, FieldElem) else e for e in u]
    vv = [e.value if isinstance(e, FieldElem) else e for e in v]
    return FieldElem(params.inner(uu, vv), params)


def split_limbs(x: int, r: int, m: int) -> list[int]:
    """Little-endian limbs of an r*m-bit string: limb 0 = lowest-order bits."""
    mask = (1 << m) - 1
    return [(x >> (j * m)) & mask for j in range(r)]


def join_limbs(limbs: Sequence[int], m: int) -> int:
    acc = 0
    for j, limb in enumerate(limbs):
        acc |= limb << (j * m)
    return acc


def ip_extractor(x: int, y: int, n: int, m: int, params: FieldParams | None = None) -> int:
    """Two-source inner-product extractor: n-bit inputs as vectors in
    GF(2^m)^(n/m), output the m-bit field inner product."""
    if n % m:
        raise FieldError(f"m={m} does not divide n={n}")
    params = params or FieldParams.default(m)
    r = n // m
    return params.inner(split_limbs(x, r, m), split_limbs(y, r, m))


def ip_extractor_error(k1: float, k2: float, n: int, m: int) -> float:
    """TV error bound 2^((n + m - k1 - k2)/2) for the inner-product extractor
    on independent sources with min-entropies k1, k2."""
    if n % m:
        raise FieldError(f"m={m} does not divide n={n}")
    return 2.0 ** ((n + m - k1 - k2) / 2.0)
