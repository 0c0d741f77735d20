"""Exact distributions over fixed-width bitstrings.

Probabilities are stored as exact `fractions.Fraction` values (the default)
or as floats with a declared tolerance.  Everything downstream -- total
variation distance, min-entropy, smooth min-entropy, heavy sets and the
TV-based entropy upper bound -- is built on this substrate so that audit
results do not hinge on float noise at desk scale.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

FLOAT_SUM_TOL = 1e-12
ENTROPY_SLACK = 1e-9

Prob = Fraction | float


class DistError(ValueError):
    """Malformed distribution or mismatched operands."""


def _log2(x: Prob) -> float:
    if isinstance(x, Fraction):
        return math.log2(x.numerator) - math.log2(x.denominator)
    return math.log2(x)


class Dist:
    """A probability distribution over ``t``-bit outcomes.

    Only atoms with nonzero mass are stored.  ``exact`` distributions carry
    Fractions and compare exactly; float distributions are validated to sum
    to 1 within ``FLOAT_SUM_TOL``.
    """

    __slots__ = ("bit_width", "mass", "exact")

    def __init__(self, bit_width: int, mass: Mapping[int, Prob], exact: bool | None = None):
        if bit_width < 0:
            raise DistError("bit_width must be >= 0")
        if exact is None:
            exact = all(isinstance(p, (Fraction, int)) for p in mass.values())
        clean: dict[int, Prob] = {}
        limit = 1 << bit_width
        for outcome, p in mass.items():
            if not 0 <= outcome < limit:
                raise DistError(f"outcome {outcome} out of range for t={bit_width}")
            p = Fraction(p) if exact else float(p)
            if p < 0:
                raise DistError(f"negative probability at outcome {outcome}")
            if p != 0:
                clean[outcome] = p
        total = sum(clean.values())
        if exact:
            if total != 1:
                raise DistError(f"probabilities sum to {total}, expected 1")
        elif abs(total - 1.0) > FLOAT_SUM_TOL:
            raise DistError(f"probabilities sum to {total}, expected 1 +/- {FLOAT_SUM_TOL}")
        self.bit_width = bit_width
        self.mass = clean
        self.exact = exact

    # -- constructors ------------------------------------------------------

    @classmethod
    def uniform(cls, bit_width: int) -> "Dist":
        n = 1 << bit_width
        p = Fraction(1, n)
        return cls(bit_width, {x: p for x in range(n)})

    @classmethod
    def point(cls, bit_width: int, outcome: int) -> "Dist":
        return cls(bit_width, {outcome: Fraction(1)})

    @classmethod
    def from_counts(cls, bit_width: int, counts: Mapping[int, int], total: int) -> "Dist":
        """Distribution assigning mass count/total to each outcome."""
        return cls(bit_width, {x: Fraction(c, total) for x, c in counts.items() if c})

    # -- accessors ---------------------------------------------------------

    def prob(self, outcome: int) -> Prob:
        zero = Fraction(0) if self.exact else 0.0
        return self.mass.get(outcome, zero)

    def support(self) -> list[int]:
        return sorted(self.mass)

    def max_atom(self) -> Prob:
        return max(self.mass.values())

    def prob_of_set(self, outcomes: Iterable[int]) -> Prob:
        zero = Fraction(0) if self.exact else 0.0
        return sum((self.mass[x] for x in set(outcomes) if x in self.mass), zero)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self.bit_width == other.bit_width and self.mass == other.mass

    def __hash__(self):  # pragma: no cover - dicts are unhashable anyway
        raise TypeError("Dist is not hashable")

    def __repr__(self) -> str:
        return f"Dist(t={self.bit_width}, atoms={len(self.mass)}, exact={self.exact})"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        out = {}
        for x, p in sorted(self.mass.items()):
            if isinstance(p, Fraction):
                out[str(x)] = f"{p.numerator}/{p.denominator}"
            else:
                out[str(x)] = repr(p)
        return {"t": self.bit_width, "mass": out}

    @classmethod
    def from_json(cls, obj: dict) -> "Dist":
        mass: dict[int, Prob] = {}
        exact = True
        for key, val in obj["mass"].items():
            if "/" in val:
                num, den = val.split("/")
                mass[int(key)] = Fraction(int(num), int(den))
            else:
                mass[int(key)] = float(val)
                exact = False
        return cls(obj["t"], mass, exact=exact)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class SmoothEntropyResult:
    """Outcome of the smooth min-entropy computation.

    ``cap`` is the smallest per-atom ceiling c >= 2^-t such that trimming
    all mass above c removes at most eps total; ``entropy_bits`` is -log2(cap)
    and ``removed_mass`` the mass actually trimmed.
    """

    entropy_bits: float
    cap: Prob
    removed_mass: Prob


def tv_distance(p: Dist, q: Dist) -> Prob:
    """Total-variation distance: half the L1 gap, equivalently the largest
    probability gap over events."""
    if p.bit_width != q.bit_width:
        raise DistError(f"width mismatch: {p.bit_width} vs {q.bit_width}")
    exact = p.exact and q.exact
    acc: Prob = Fraction(0) if exact else 0.0
    for x in set(p.mass) | set(q.mass):
        acc += abs(p.prob(x) - q.prob(x))
    return acc / 2


def min_entropy(p: Dist) -> float:
    """-log2 of the largest atom."""
    return -_log2(p.max_atom())


def smooth_min_entropy(p: Dist, eps: Prob) -> SmoothEntropyResult:
    """Largest min-entropy achievable within TV distance eps of p.

    The smoothing distribution lives on the same 2^t outcomes, which makes
    cap-and-redistribute (water-filling) optimal: mass trimmed above the cap
    always fits below it because the cap never drops under 2^-t.  The minimal
    feasible cap is found exactly on the sorted atoms.
    """
    if not 0 <= eps < 1:
        raise DistError("eps must lie in [0, 1)")
    if p.exact:
        eps = Fraction(eps)
    atoms = sorted(p.mass.values(), reverse=True)
    floor_cap: Prob = Fraction(1, 1 << p.bit_width) if p.exact else 1.0 / (1 << p.bit_width)

    def trimmed(cap: Prob) -> Prob:
        zero: Prob = Fraction(0) if p.exact else 0.0
        return sum((a - cap for a in atoms if a > cap), zero)

    if trimmed(floor_cap) <= eps:
        cap = floor_cap
    else:
        cap = atoms[0]  # eps = 0 fallback
        prefix: Prob = Fraction(0) if p.exact else 0.0
        for j, a in enumerate(atoms, start=1):
            prefix += a
            cand = (prefix - eps) / j
            nxt = atoms[j] if j < len(atoms) else (Fraction(0) if p.exact else 0.0)
            if cand >= nxt:
                cap = cand
                break
        if cap < floor_cap:
            cap = floor_cap
    return SmoothEntropyResult(entropy_bits=-_log2(cap), cap=cap, removed_mass=trimmed(cap))


def _entropy_below(cap: Prob, k: float) -> bool:
    """Exact-where-possible test for -log2(cap) < k."""
    if isinstance(cap, Fraction) and float(k).is_integer() and k >= 0:
        return cap > Fraction(1, 1 << int(k))
    return -_log2(cap) < k


def heavy_set(p: Dist, k: float, eps: Prob) -> set[int] | None:
    """Small set of outcomes witnessing smooth min-entropy below k.

    Returns D with |D| < 2^k and Pr[p in D] >= eps exactly when the smooth
    min-entropy at eps is below k; absent otherwise.  Greedy on the heaviest
    atoms, ties broken by ascending outcome value.
    """
    if not 0 < eps < 1:
        raise DistError("eps must lie in (0, 1)")
    res = smooth_min_entropy(p, eps)
    if not _entropy_below(res.cap, k):
        return None
    if p.exact:
        eps = Fraction(eps)
    chosen: set[int] = set()
    acc: Prob = Fraction(0) if p.exact else 0.0
    for x, prob in sorted(p.mass.items(), key=lambda kv: (-kv[1], kv[0])):
        chosen.add(x)
        acc += prob
        if acc >= eps:
            break
    if acc < eps or len(chosen) >= 2.0 ** k:
        raise AssertionError("heavy-set construction violated its own guarantee")
    return chosen


def tv_entropy_bound_check(p: Dist, outcomes: Iterable[int], eps: Prob) -> tuple[float, bool]:
    """Entropy upper bound from an event of large probability.

    If Pr[p in S] = q > eps, every distribution within TV eps of p puts
    mass at least q - eps on S, so its largest atom is at least (q - eps)/|S|
    and the smooth min-entropy is at most log2(|S| / (q - eps)).  Returns
    the bound and whether smooth_min_entropy confirms it (with float slack).
    Used as the certification step after every adversary construction.
    """
    s = set(outcomes)
    if not s:
        raise DistError("empty event")
    q = p.prob_of_set(s)
    if p.exact:
        eps = Fraction(eps)
    if q <= eps:
        raise DistError(f"event probability {q} does not exceed eps={eps}")
    bound = _log2(len(s)) - _log2(q - eps)
    holds = smooth_min_entropy(p, eps).entropy_bits <= bound + ENTROPY_SLACK
    return bound, holds
