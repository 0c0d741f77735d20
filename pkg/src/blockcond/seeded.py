"""Seeded extractors at desk scale, and the output-lightness audit.

The real inner extractor these constructions assume is a black box with a
(k, eps) contract and logarithmic seed; its internals are out of scope.  Two
stand-ins are provided: a tabulated uniformly random function (certifying at
micro scale; lazily materialized above the dense-table limit) and a keyed
mixing heuristic (never used in certification-grade audits).  A Toeplitz
matrix-hash extractor covers the leftover-hash regime where the seed budget
allows seeds of length n + m - 1.

Bit conventions: an n-bit input is an int; bit i of a width-w value, counted
1-based from the most significant end, is (x >> (w - i)) & 1.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from typing import Iterable

import numpy as np

DENSE_TABLE_LIMIT = 26  # n + d above this: lazy per-entry derivation
EXHAUSTIVE_LIMIT = 30   # n + d above this: sampling audits only


class ExtractorError(ValueError):
    pass


@dataclass(frozen=True)
class SeededExtSpec:
    n: int
    d: int
    m: int
    declared_k: float | None = None
    declared_eps: float | None = None

    def __post_init__(self):
        if self.m > self.n:
            raise ExtractorError("need m <= n")
        if self.d < 1:
            raise ExtractorError("need d >= 1")


@dataclass(frozen=True)
class OutputLightReport:
    """Largest preimage class over inputs x (seeds existentially quantified)."""
    max_preimages: int
    witness_output: int
    threshold: int | None
    passed: bool | None
    certifying: bool
    mode: str

    def to_json(self) -> dict:
        return {
            "max_preimages": self.max_preimages,
            "witness_output": self.witness_output,
            "threshold": self.threshold,
            "passed": self.passed,
            "certifying": self.certifying,
            "mode": self.mode,
        }


def _check_width(value: int, width: int, name: str) -> None:
    if not 0 <= value < (1 << width):
        raise ExtractorError(f"{name} out of range for width {width}")


# -- Toeplitz / leftover-hash --------------------------------------------------

def _toeplitz_rows(s: int, n: int, m: int) -> list[int]:
    """Rows of the m x n Toeplitz matrix encoded by an (n+m-1)-bit seed.

    Row 0 reads s[1..n] left to right (1-based from the MSB); each later row
    shifts right by one and takes its leading entry from the next seed bit,
    so rows i >= 1 lead with s[n+i].  Each row is packed MSB-first.
    """
    width = n + m - 1
    _check_width(s, width, "seed")
    row = s >> (m - 1)  # s[1..n]
    rows = [row]
    for i in range(1, m):
        lead = (s >> (m - 1 - i)) & 1
        row = (row >> 1) | (lead << (n - 1))
        rows.append(row)
    return rows


def toeplitz_ext(x: int, s: int, n: int, m: int) -> int:
    """GF(2) product T(s) . x for the Toeplitz matrix T(s); linear in x."""
    _check_width(x, n, "input")
    out = 0
    for row in _toeplitz_rows(s, n, m):
        out = (out << 1) | (bin(row & x).count("1") & 1)
    return out


class ToeplitzExtractor:
    """Leftover-hash extractor; seed length d = n + m - 1."""

    kind = "toeplitz"

    def __init__(self, n: int, m: int, declared_k: float | None = None,
                 declared_eps: float | None = None):
        self.spec = SeededExtSpec(n, n + m - 1, m, declared_k, declared_eps)

    def eval(self, x: int, s: int) -> int:
        return toeplitz_ext(x, s, self.spec.n, self.spec.m)

    def to_json(self) -> dict:
        return {"kind": self.kind, "spec": dataclasses.asdict(self.spec), "seed_material": ""}


# -- tabulated random function ------------------------------------------------

def _lazy_entry(seed_bytes: bytes, index: int, m: int) -> int:
    digest = hashlib.blake2b(index.to_bytes(16, "big"), key=seed_bytes,
                             digest_size=16).digest()
    return int.from_bytes(digest, "big") & ((1 << m) - 1)


class TableRandomExtractor:
    """A uniformly random function [2^n] x [2^d] -> [2^m], reproducible
    from rng_seed.

    Dense mode draws the whole table from one PCG64 stream (n + d <= 26).
    Lazy mode derives each entry independently from a keyed hash of its
    index; entries are i.i.d. uniform and never materialized, which keeps
    the random-table semantics available when the domain is too large to
    tabulate.
    """

    kind = "table"

    def __init__(self, spec: SeededExtSpec, rng_seed: int, lazy: bool | None = None):
        self.spec = spec
        self.rng_seed = rng_seed
        if lazy is None:
            lazy = spec.n + spec.d > DENSE_TABLE_LIMIT
        self.lazy = lazy
        if not lazy:
            if spec.n + spec.d > DENSE_TABLE_LIMIT:
                raise ExtractorError("table too large; use lazy mode")
            rng = np.random.Generator(np.random.PCG64(rng_seed))
            self.table = rng.integers(0, 1 << spec.m, size=1 << (spec.n + spec.d),
                                      dtype=np.int64)
        else:
            self.table = None
            self._key = int(rng_seed).to_bytes(16, "big", signed=False)

    def eval(self, x: int, s: int) -> int:
        _check_width(x, self.spec.n, "input")
        _check_width(s, self.spec.d, "seed")
        idx = (x << self.spec.d) | s
        if self.table is not None:
            return int(self.table[idx])
        return _lazy_entry(self._key, idx, self.spec.m)

    def eval_batch(self, xs: np.ndarray, ss: np.ndarray) -> np.ndarray:
        if self.table is not None:
            return self.table[(xs.astype(np.int64) << self.spec.d) | ss]
        return np.array([self.eval(int(x), int(s)) for x, s in zip(xs, ss)],
                        dtype=np.int64)

    def to_json(self) -> dict:
        return {"kind": self.kind, "spec": dataclasses.asdict(self.spec),
                "seed_material": f"{self.rng_seed:x}", "lazy": self.lazy}


# -- keyed mixing heuristic -----------------------------------------------------

def keyed_mix_ext(x: int, s: int, key: int, spec: SeededExtSpec) -> int:
    """Deterministic keyed mixing of (x, s), truncated to m bits.

    Heuristic stand-in when n is too large to tabulate; documented as such
    and never used where a certified random table is required.
    """
    _check_width(x, spec.n, "input")
    _check_width(s, spec.d, "seed")
    payload = x.to_bytes((spec.n + 7) // 8 or 1, "big") + s.to_bytes((spec.d + 7) // 8, "big")
    digest = hashlib.blake2b(payload, key=key.to_bytes(16, "big"), digest_size=16,
                             person=b"keyed-mix").digest()
    return int.from_bytes(digest, "big") & ((1 << spec.m) - 1)


class KeyedMixExtractor:
    kind = "keyed"

    def __init__(self, spec: SeededExtSpec, key: int):
        self.spec = spec
        self.key = key

    def eval(self, x: int, s: int) -> int:
        return keyed_mix_ext(x, s, self.key, self.spec)

    def to_json(self) -> dict:
        return {"kind": self.kind, "spec": dataclasses.asdict(self.spec),
                "seed_material": f"{self.key:x}"}


def ext_eval(ext, x: int, s: int) -> int:
    """Width-checked evaluation of any extractor instance."""
    _check_width(x, ext.spec.n, "input")
    _check_width(s, ext.spec.d, "seed")
    return ext.eval(x, s)


# -- audits ---------------------------------------------------------------------

def audit_output_light(ext, threshold: int | None = None, mode: str = "auto",
                       sample_inputs: int = 4096,
                       rng: np.random.Generator | None = None) -> OutputLightReport:
    """Count, per output z, the inputs x that can reach z under some seed.

    Exhaustive (certifying) when 2^(n+d) is enumerable; otherwise a uniform
    sample of inputs gives a lower-bound estimate flagged non-certifying.
    """
    spec = ext.spec
    exhaustive = spec.n + spec.d <= EXHAUSTIVE_LIMIT
    if mode == "exhaustive" and not exhaustive:
        raise ExtractorError("domain too large for the exhaustive audit")
    if mode == "sample":
        exhaustive = False
    counts = np.zeros(1 << spec.m, dtype=np.int64)
    if exhaustive:
        seeds = range(1 << spec.d)
        for x in range(1 << spec.n):
            for z in {ext.eval(x, s) for s in seeds}:
                counts[z] += 1
        mode_used = "exhaustive"
    else:
        rng = rng or np.random.default_rng(0)
        xs = rng.integers(0, 1 << spec.n, size=sample_inputs)
        seeds = range(1 << spec.d)
        for x in np.unique(xs):
            for z in {ext.eval(int(x), s) for s in seeds}:
                counts[z] += 1
        mode_used = "sample"
    witness = int(counts.argmax())
    max_pre = int(counts[witness])
    passed = None if threshold is None else bool(max_pre < threshold)
    return OutputLightReport(max_preimages=max_pre, witness_output=witness,
                             threshold=threshold, passed=passed,
                             certifying=exhaustive, mode=mode_used)


def exact_extractor_tv(ext, support: Iterable[int]):
    """Exact TV between Ext(X, U_d) for X flat on ``support`` and U_m."""
    from .dist import Dist, tv_distance

    support = sorted(set(support))
    spec = ext.spec
    counts: dict[int, int] = {}
    for x in support:
        for s in range(1 << spec.d):
            z = ext.eval(x, s)
            counts[z] = counts.get(z, 0) + 1
    total = len(support) << spec.d
    dist = Dist.from_counts(spec.m, counts, total)
    return tv_distance(dist, Dist.uniform(spec.m)), dist


def exact_strong_tv(ext, support: Iterable[int]):
    """Exact TV between (S, Ext(X, S)) and (S, U_m) for X flat on support:
    the average over seeds of the per-seed output TV."""
    from fractions import Fraction

    from .dist import Dist, tv_distance

    support = sorted(set(support))
    spec = ext.spec
    acc = Fraction(0)
    for s in range(1 << spec.d):
        counts: dict[int, int] = {}
        for x in support:
            z = ext.eval(x, s)
            counts[z] = counts.get(z, 0) + 1
        dist = Dist.from_counts(spec.m, counts, len(support))
        acc += Fraction(tv_distance(dist, Dist.uniform(spec.m)))
    return acc / (1 << spec.d)


def audit_strongness(ext, k: int, trials: int, rng: np.random.Generator,
                     climb_steps: int = 40):
    """Randomized hill-climb over flat 2^k-subsets maximizing the strong TV.

    Flat sources are extremal for TV by convexity, so the maximum over them
    bounds the extractor's strong error against all k-sources.
    """
    spec = ext.spec
    size = 1 << k
    universe = 1 << spec.n
    best = None
    for _ in range(trials):
        current = set(rng.choice(universe, size=size, replace=False).tolist())
        cur_tv = exact_strong_tv(ext, current)
        for _ in range(climb_steps):
            drop = int(rng.choice(sorted(current)))
            add = int(rng.integers(0, universe))
            if add in current:
                continue
            cand = (current - {drop}) | {add}
            cand_tv = exact_strong_tv(ext, cand)
            if cand_tv > cur_tv:
                current, cur_tv = cand, cand_tv
        if best is None or cur_tv > best[0]:
            best = (cur_tv, sorted(current))
    return best
