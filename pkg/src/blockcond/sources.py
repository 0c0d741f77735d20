"""Block sources with adversarial bad blocks, and exact output distributions.

Conventions, pinned for bit-exact reproducibility:
  * blocks are 1-indexed; block values are n-bit integers;
  * a packed tuple of blocks puts block 1 in the most significant position:
    pack(x1..xk) = x1 << n(k-1) | ... | xk;
  * adaptive tables are flat sequences indexed by the packed values of all
    strictly earlier blocks; NOSF tables are indexed by the packed values of
    all good blocks in ascending index order.

Good blocks are uniform throughout (the k = n case); general (n,k) good
blocks are out of scope here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dist import Dist, DistError


class SourceError(ValueError):
    pass


def pack_blocks(values: Sequence[int], n: int) -> int:
    acc = 0
    for v in values:
        acc = (acc << n) | v
    return acc


def unpack_blocks(packed: int, count: int, n: int) -> tuple[int, ...]:
    mask = (1 << n) - 1
    return tuple((packed >> (n * (count - 1 - i))) & mask for i in range(count))


class BlockFunctionTable:
    """A total map f: ([2^n])^ell -> [2^t], dense or callback-backed."""

    def __init__(self, n: int, ell: int, t: int,
                 table: np.ndarray | Sequence[int] | None = None,
                 fn: Callable[..., int] | None = None):
        if n < 1 or ell < 1 or t < 0:
            raise SourceError("need n >= 1, ell >= 1, t >= 0")
        self.n = n
        self.ell = ell
        self.t = t
        self._fn = fn
        self._table: np.ndarray | None = None
        if table is not None:
            arr = np.asarray(table, dtype=np.int64)
            if arr.shape != (1 << (n * ell),):
                raise SourceError(f"table must be flat with 2^(n*ell) = "
                                  f"{1 << (n * ell)} entries, got {arr.shape}")
            if arr.size and (arr.min() < 0 or arr.max() >= (1 << t)):
                raise SourceError("table entry out of output range")
            self._table = arr
        elif fn is None:
            raise SourceError("need a table or a callback")

    @classmethod
    def random(cls, n: int, ell: int, t: int, rng: np.random.Generator) -> "BlockFunctionTable":
        size = 1 << (n * ell)
        return cls(n, ell, t, table=rng.integers(0, 1 << t, size=size, dtype=np.int64))

    @classmethod
    def constant(cls, n: int, ell: int, t: int, value: int) -> "BlockFunctionTable":
        return cls(n, ell, t, table=np.full(1 << (n * ell), value, dtype=np.int64))

    def index(self, blocks: Sequence[int]) -> int:
        return pack_blocks(blocks, self.n)

    def __call__(self, blocks: Sequence[int]) -> int:
        if len(blocks) != self.ell:
            raise SourceError(f"expected {self.ell} blocks, got {len(blocks)}")
        if self._table is not None:
            return int(self._table[self.index(blocks)])
        return int(self._fn(*blocks))

    def dense(self) -> np.ndarray:
        """Flat table indexed by the packed blocks; materialized on demand."""
        if self._table is None:
            if self.n * self.ell > 24:
                raise SourceError("refusing to materialize a table above 2^24 entries")
            size = 1 << (self.n * self.ell)
            vals = [self._fn(*unpack_blocks(i, self.ell, self.n)) for i in range(size)]
            self._table = np.asarray(vals, dtype=np.int64)
        return self._table

    def as_array(self) -> np.ndarray:
        """Dense table reshaped to one axis per block (block 1 first)."""
        return self.dense().reshape((1 << self.n,) * self.ell)


# -- adversarial bad-block descriptors --------------------------------------

@dataclass(frozen=True)
class Fixed:
    """Bad block pinned to a constant value."""
    value: int


@dataclass(frozen=True)
class Adaptive:
    """Bad block computed from all strictly earlier blocks.

    ``table`` is indexed by the packed values of blocks 1..i-1.  The domain
    enforces the look-ahead-free requirement structurally.
    """
    table: tuple[int, ...]


@dataclass(frozen=True)
class GoodsTable:
    """NOSF bad block computed from all good-block values (any position)."""
    table: tuple[int, ...]


def _check_block_value(v: int, n: int, where: str) -> None:
    if not 0 <= v < (1 << n):
        raise SourceError(f"{where}: block value {v} out of range for n={n}")


class FiShelaDesc:
    """Uniform fixed-index SHELA source: good blocks are independent uniform,
    each bad block is a total function of the blocks before it."""

    def __init__(self, n: int, ell: int, good: Sequence[int],
                 bad: Mapping[int, Fixed | Adaptive]):
        self.n = n
        self.ell = ell
        self.good = tuple(sorted(good))
        self.bad = dict(bad)
        self.validate()

    @property
    def g(self) -> int:
        return len(self.good)

    def validate(self) -> None:
        if len(set(self.good)) != len(self.good):
            raise SourceError("duplicate good indices")
        indices = set(self.good) | set(self.bad)
        if indices != set(range(1, self.ell + 1)):
            raise SourceError("good/bad indices must partition 1..ell")
        if set(self.good) & set(self.bad):
            raise SourceError("good and bad indices overlap")
        for i, b in self.bad.items():
            if isinstance(b, Fixed):
                _check_block_value(b.value, self.n, f"bad block {i}")
            elif isinstance(b, Adaptive):
                want = 1 << (self.n * (i - 1))
                if len(b.table) != want:
                    raise SourceError(f"bad block {i}: adaptive table has "
                                      f"{len(b.table)} entries, expected {want}")
                for v in b.table:
                    _check_block_value(v, self.n, f"bad block {i}")
            else:
                raise SourceError(f"bad block {i}: unsupported descriptor {type(b)}")

    def resolve(self, good_values: Sequence[int]) -> tuple[int, ...]:
        """Blocks produced when the good blocks take the given values
        (aligned with self.good in ascending order)."""
        if len(good_values) != self.g:
            raise SourceError("good value count mismatch")
        out: list[int] = []
        it = iter(good_values)
        prefix = 0
        for i in range(1, self.ell + 1):
            if i in self.bad:
                b = self.bad[i]
                v = b.value if isinstance(b, Fixed) else b.table[prefix]
            else:
                v = next(it)
            out.append(v)
            prefix = (prefix << self.n) | v
        return tuple(out)

    def to_json(self) -> dict:
        bad = {}
        for i, b in self.bad.items():
            if isinstance(b, Fixed):
                bad[str(i)] = {"kind": "fixed", "value": b.value}
            else:
                bad[str(i)] = {"kind": "adaptive", "table": list(b.table)}
        return {"type": "fishela", "n": self.n, "ell": self.ell,
                "good": list(self.good), "bad": bad}

    @classmethod
    def from_json(cls, obj: dict) -> "FiShelaDesc":
        bad: dict[int, Fixed | Adaptive] = {}
        for key, spec in obj["bad"].items():
            if spec["kind"] == "fixed":
                bad[int(key)] = Fixed(spec["value"])
            else:
                bad[int(key)] = Adaptive(tuple(spec["table"]))
        return cls(obj["n"], obj["ell"], obj["good"], bad)


class NosfDesc:
    """Uniform NOSF source: bad blocks are total functions of all good
    blocks, with no look-ahead restriction."""

    def __init__(self, n: int, ell: int, good: Sequence[int],
                 bad: Mapping[int, Fixed | GoodsTable]):
        self.n = n
        self.ell = ell
        self.good = tuple(sorted(good))
        self.bad = dict(bad)
        self.validate()

    @property
    def g(self) -> int:
        return len(self.good)

    def validate(self) -> None:
        indices = set(self.good) | set(self.bad)
        if indices != set(range(1, self.ell + 1)) or set(self.good) & set(self.bad):
            raise SourceError("good/bad indices must partition 1..ell")
        want = 1 << (self.n * self.g)
        for i, b in self.bad.items():
            if isinstance(b, Fixed):
                _check_block_value(b.value, self.n, f"bad block {i}")
            elif isinstance(b, GoodsTable):
                if len(b.table) != want:
                    raise SourceError(f"bad block {i}: table has {len(b.table)} "
                                      f"entries, expected {want}")
                for v in b.table:
                    _check_block_value(v, self.n, f"bad block {i}")
            else:
                raise SourceError(f"bad block {i}: unsupported descriptor {type(b)}")

    def fishela_compatible(self) -> bool:
        """True when every adaptive bad block sits after all good blocks,
        i.e. the same source is realizable with look-ahead-free tables."""
        last_good = max(self.good, default=0)
        return all(isinstance(b, Fixed) or i > last_good for i, b in self.bad.items())

    def resolve(self, good_values: Sequence[int]) -> tuple[int, ...]:
        if len(good_values) != self.g:
            raise SourceError("good value count mismatch")
        packed_goods = pack_blocks(good_values, self.n)
        by_index = dict(zip(self.good, good_values))
        out = []
        for i in range(1, self.ell + 1):
            if i in self.bad:
                b = self.bad[i]
                out.append(b.value if isinstance(b, Fixed) else b.table[packed_goods])
            else:
                out.append(by_index[i])
        return tuple(out)

    def to_json(self) -> dict:
        bad = {}
        for i, b in self.bad.items():
            if isinstance(b, Fixed):
                bad[str(i)] = {"kind": "fixed", "value": b.value}
            else:
                bad[str(i)] = {"kind": "goods_table", "table": list(b.table)}
        return {"type": "nosf", "n": self.n, "ell": self.ell,
                "good": list(self.good), "bad": bad}

    @classmethod
    def from_json(cls, obj: dict) -> "NosfDesc":
        bad: dict[int, Fixed | GoodsTable] = {}
        for key, spec in obj["bad"].items():
            if spec["kind"] == "fixed":
                bad[int(key)] = Fixed(spec["value"])
            else:
                bad[int(key)] = GoodsTable(tuple(spec["table"]))
        return cls(obj["n"], obj["ell"], obj["good"], bad)


class ShelaDesc:
    """Uniform SHELA source: a distribution over good-index tuples, with a
    fiSHELA-style adversary attached to every tuple the index distribution
    can produce."""

    def __init__(self, n: int, ell: int, g: int,
                 index_dist: Sequence[tuple[Sequence[int], Fraction]],
                 per_tuple: Mapping[tuple[int, ...], FiShelaDesc]):
        self.n = n
        self.ell = ell
        self.g = g
        self.index_dist = tuple((tuple(sorted(idx)), Fraction(w)) for idx, w in index_dist)
        self.per_tuple = dict(per_tuple)
        self.validate()

    def validate(self) -> None:
        total = sum((w for _, w in self.index_dist), Fraction(0))
        if total != 1:
            raise SourceError(f"index distribution sums to {total}")
        seen = set()
        for idx, w in self.index_dist:
            if w < 0:
                raise SourceError("negative index weight")
            if idx in seen:
                raise SourceError(f"duplicate index tuple {idx}")
            seen.add(idx)
            if len(idx) != self.g or not all(1 <= i <= self.ell for i in idx):
                raise SourceError(f"bad index tuple {idx}")
            comp = self.per_tuple.get(idx)
            if comp is None:
                raise SourceError(f"no adversary for index tuple {idx}")
            if comp.good != idx or comp.n != self.n or comp.ell != self.ell:
                raise SourceError(f"component for {idx} does not match the tuple")


def exact_output_dist(f: BlockFunctionTable, src) -> Dist:
    """Exact distribution of f(X) by enumerating all good-block assignments."""
    if isinstance(src, ShelaDesc):
        if f.n != src.n or f.ell != src.ell:
            raise SourceError("function/source shape mismatch")
        acc: dict[int, Fraction] = {}
        for idx, w in src.index_dist:
            if w == 0:
                continue
            comp_dist = exact_output_dist(f, src.per_tuple[idx])
            for z, p in comp_dist.mass.items():
                acc[z] = acc.get(z, Fraction(0)) + w * p
        return Dist(f.t, acc)

    if f.n != src.n or f.ell != src.ell:
        raise SourceError("function/source shape mismatch")
    g = src.g
    if g * src.n > 24:
        raise SourceError("good-block space above 2^24; enumeration refused")
    counts: dict[int, int] = {}
    total = 1 << (g * src.n)
    for packed in range(total):
        goods = unpack_blocks(packed, g, src.n) if g else ()
        z = f(src.resolve(goods))
        counts[z] = counts.get(z, 0) + 1
    return Dist.from_counts(f.t, counts, total)


def joint_block_dist(src: FiShelaDesc | NosfDesc) -> Dist:
    """Exact joint distribution of the block tuple, packed to ell*n bits."""
    g = src.g
    if g * src.n > 24 or src.ell * src.n > 24:
        raise SourceError("joint space too large to enumerate")
    counts: dict[int, int] = {}
    total = 1 << (g * src.n)
    for packed in range(total):
        goods = unpack_blocks(packed, g, src.n) if g else ()
        blocks = src.resolve(goods)
        key = pack_blocks(blocks, src.n)
        counts[key] = counts.get(key, 0) + 1
    return Dist.from_counts(src.ell * src.n, counts, total)


def decompose_shela(s: ShelaDesc) -> list[tuple[Fraction, FiShelaDesc]]:
    """Convex decomposition of a SHELA source into fixed-index components.

    The weights are exactly the index-distribution probabilities; mixing the
    component output distributions reproduces the source's output
    distribution exactly (rational arithmetic, no tolerance).
    """
    return [(w, s.per_tuple[idx]) for idx, w in s.index_dist if w > 0]


def check_almost_cg_joint(joint: Dist, n: int, ell: int, good: Iterable[int], k: float) -> bool:
    """Conditional min-entropy check on an explicit joint distribution.

    True iff every claimed good index i has H_inf(X_i | prefix) >= k for
    every prefix of positive probability.
    """
    if joint.bit_width != n * ell:
        raise DistError("joint width != n*ell")
    good = sorted(set(good))
    threshold_exact = None
    if float(k).is_integer() and k >= 0:
        threshold_exact = Fraction(1, 1 << int(k))
    for i in good:
        # group mass by (prefix, block i value)
        cond: dict[int, dict[int, Fraction]] = {}
        for packed, p in joint.mass.items():
            blocks = unpack_blocks(packed, ell, n)
            prefix = pack_blocks(blocks[: i - 1], n)
            cond.setdefault(prefix, {})
            xi = blocks[i - 1]
            cond[prefix][xi] = cond[prefix].get(xi, Fraction(0)) + p
        for prefix, masses in cond.items():
            total = sum(masses.values())
            top = max(masses.values())
            # H_inf(X_i | prefix) = -log2(top/total)
            ratio = top / total
            if threshold_exact is not None and isinstance(ratio, Fraction):
                if ratio > threshold_exact:
                    return False
            elif -math.log2(float(ratio)) < k - 1e-9:
                return False
    return True


def check_almost_cg(src: FiShelaDesc, k: float, good: Iterable[int] | None = None) -> bool:
    """Almost-CG check for a described source: every good block must keep
    conditional min-entropy >= k given every reachable prefix."""
    good = src.good if good is None else tuple(sorted(good))
    return check_almost_cg_joint(joint_block_dist(src), src.n, src.ell, good, k)


def sample(src, rng: np.random.Generator) -> tuple[int, ...]:
    """One draw of the block tuple, reproducible from the generator state."""
    if isinstance(src, ShelaDesc):
        weights = [float(w) for _, w in src.index_dist]
        idx = src.index_dist[rng.choice(len(weights), p=weights)][0]
        return sample(src.per_tuple[idx], rng)
    goods = tuple(int(rng.integers(0, 1 << src.n)) for _ in range(src.g))
    return src.resolve(goods)


def load_function_file(path: str, n: int, ell: int, t: int) -> BlockFunctionTable:
    """Raw little-endian array of t-bit outputs indexed by packed input bits."""
    if t <= 8:
        dtype = "<u1"
    elif t <= 16:
        dtype = "<u2"
    elif t <= 32:
        dtype = "<u4"
    else:
        dtype = "<u8"
    arr = np.fromfile(path, dtype=dtype).astype(np.int64)
    return BlockFunctionTable(n, ell, t, table=arr)


def dump_function_file(f: BlockFunctionTable, path: str) -> None:
    t = f.t
    if t <= 8:
        dtype = "<u1"
    elif t <= 16:
        dtype = "<u2"
    elif t <= 32:
        dtype = "<u4"
    else:
        dtype = "<u8"
    f.dense().astype(dtype).tofile(path)


def desc_from_json(obj: dict | str):
    if isinstance(obj, str):
        obj = json.loads(obj)
    if obj["type"] == "fishela":
        return FiShelaDesc.from_json(obj)
    if obj["type"] == "nosf":
        return NosfDesc.from_json(obj)
    raise SourceError(f"unknown descriptor type {obj['type']}")
