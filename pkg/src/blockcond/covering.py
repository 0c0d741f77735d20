"""Greedy covering procedures on bipartite graphs with certified bounds.

Two variants: plain vertex covering (pick the max-degree right vertex,
remove it with its neighborhood, stop once a c1 fraction of the left side
is covered) and color covering on a complete edge-colored bipartite graph
(pick the color with the most residual edges, delete its class, stop once
more than c1*|U|*|V| edges are covered).  Both certify the cardinality
bound of the underlying counting argument and the per-pick floor it rests
on.  Ties always break toward the smallest index, so runs are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SLACK = 1e-9


class CoverError(ValueError):
    """Precondition violation, reported with a witness vertex."""


class CoverBoundViolation(AssertionError):
    """The certified cardinality bound failed -- a genuine counterexample."""


@dataclass
class BipartiteGraph:
    n_left: int
    n_right: int
    adjacency: list[list[int]]  # per left vertex, sorted right neighbors

    def __post_init__(self):
        if len(self.adjacency) != self.n_left:
            raise CoverError("adjacency length != n_left")
        for u, nbrs in enumerate(self.adjacency):
            if any(not 0 <= v < self.n_right for v in nbrs):
                raise CoverError(f"left vertex {u} has a neighbor out of range")
            if sorted(set(nbrs)) != list(nbrs):
                raise CoverError(f"left vertex {u} adjacency not sorted/duplicate-free")

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def to_json(self) -> dict:
        return {"n_left": self.n_left, "n_right": self.n_right,
                "adjacency": [list(n) for n in self.adjacency]}

    @classmethod
    def from_json(cls, obj: dict) -> "BipartiteGraph":
        return cls(obj["n_left"], obj["n_right"],
                   [list(n) for n in obj["adjacency"]])


@dataclass
class ColoredCompleteBipartite:
    n_left: int
    n_right: int
    n_colors: int
    colors: np.ndarray  # shape (n_left, n_right), entries in [0, n_colors)

    def __post_init__(self):
        self.colors = np.asarray(self.colors)
        if self.colors.shape != (self.n_left, self.n_right):
            raise CoverError(f"color matrix shape {self.colors.shape} != "
                             f"({self.n_left}, {self.n_right})")
        if self.colors.size and (self.colors.min() < 0 or self.colors.max() >= self.n_colors):
            raise CoverError("color id out of range")


@dataclass
class CoverResult:
    """Chosen right vertices (or colors), with the lemma-certified bound.

    ``covered`` counts left vertices for the plain cover and edges for the
    color cover.  ``picked`` records the residual degree/count of each pick;
    ``pick_floor`` is the per-pick guarantee the size bound rests on.
    """

    chosen: list[int]
    covered: int
    steps: int
    bound: float
    pick_floor: float
    picked: list[int] = field(default_factory=list)
    covered_left: list[int] = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "chosen": list(self.chosen),
            "covered": self.covered,
            "steps": self.steps,
            "bound": self.bound,
            "pick_floor": self.pick_floor,
            "picked": list(self.picked),
            "checks": dict(self.checks),
        }


def _coverage_reached(covered: int, c1, total: int, strict: bool) -> bool:
    """covered >= c1*total (or > for strict), exactly when c1 is rational."""
    c1 = Fraction(c1)
    lhs = covered * c1.denominator
    rhs = c1.numerator * total
    return lhs > rhs if strict else lhs >= rhs


def greedy_cover(graph: BipartiteGraph, c0: float, delta: float, c1) -> CoverResult:
    """Max-degree-first cover of a c1 fraction of the left side.

    Requires every left degree >= c0 * T^delta (T = n_right) and 0 < c1 < 1.
    Postconditions, raised as CoverBoundViolation if breached:
      |N(chosen)| >= c1 * n_left,
      |chosen| <= ceil(c1 / ((1-c1) c0) * T^(1-delta)),
    and every pick has residual degree >= (1-c1) c0 n_left / T^(1-delta).
    """
    if not 0 < Fraction(c1) < 1:
        raise CoverError("c1 must lie in (0, 1)")
    n, t = graph.n_left, graph.n_right
    degree_floor = c0 * (t ** delta)
    for u in range(n):
        if graph.degree(u) < degree_floor - SLACK:
            raise CoverError(f"left vertex {u} has degree {graph.degree(u)} "
                             f"< c0*T^delta = {degree_floor}")

    right_to_left: list[list[int]] = [[] for _ in range(t)]
    for u, nbrs in enumerate(graph.adjacency):
        for v in nbrs:
            right_to_left[v].append(u)
    rdeg = np.array([len(right_to_left[v]) for v in range(t)], dtype=np.int64)
    alive_left = np.ones(n, dtype=bool)
    alive_right = np.ones(t, dtype=bool)

    chosen: list[int] = []
    picked: list[int] = []
    covered_left: list[int] = []
    covered = 0
    while not _coverage_reached(covered, c1, n, strict=False):
        masked = np.where(alive_right, rdeg, -1)
        v = int(masked.argmax())  # argmax returns the smallest index on ties
        if masked[v] <= 0:
            raise CoverBoundViolation("ran out of right vertices before reaching coverage")
        chosen.append(v)
        picked.append(int(masked[v]))
        alive_right[v] = False
        for u in right_to_left[v]:
            if alive_left[u]:
                alive_left[u] = False
                covered += 1
                covered_left.append(u)
                for w in graph.adjacency[u]:
                    rdeg[w] -= 1

    c1f = float(c1)
    bound = c1f / ((1.0 - c1f) * c0) * (t ** (1.0 - delta))
    pick_floor = (1.0 - c1f) * c0 * n / (t ** (1.0 - delta))
    checks = {
        "coverage>=c1*N": True,
        "size<=ceil(bound)": len(chosen) <= math.ceil(bound - SLACK),
        "size<=floor(bound)+1": len(chosen) <= math.floor(bound + SLACK) + 1,
        "picks>=floor": all(d >= pick_floor - SLACK for d in picked),
    }
    result = CoverResult(chosen=chosen, covered=covered, steps=len(chosen), bound=bound,
                         pick_floor=pick_floor, picked=picked,
                         covered_left=sorted(covered_left), checks=checks)
    if not all(checks.values()):
        raise CoverBoundViolation(f"greedy_cover postcondition failed: {checks}")
    return result


def greedy_color_cover(h: ColoredCompleteBipartite, c0: float, c1, c2: float,
                       delta: float) -> CoverResult:
    """Most-frequent-color-first cover of more than c1*|U|*|V| edges.

    Requires every vertex to see at most c0 * T^delta distinct colors
    (T = n_colors), 0 < c1 < 1, 0 < c2 < 1 and 1 - c0*c2 - c1 > 0.  Deleting
    a color class never changes another color's count, so the greedy order
    is the descending count order and picked counts are non-increasing.
    """
    if not 0 < Fraction(c1) < 1:
        raise CoverError("c1 must lie in (0, 1)")
    if not 0 < c2 < 1:
        raise CoverError("c2 must lie in (0, 1)")
    head = 1.0 - c0 * c2 - float(c1)
    if head <= 0:
        raise CoverError("need 1 - c0*c2 - c1 > 0")
    t = h.n_colors
    color_budget = c0 * (t ** delta)
    for axis, name in ((1, "left"), (0, "right")):
        sorted_colors = np.sort(h.colors, axis=axis)
        diff = (np.diff(sorted_colors, axis=axis) != 0).sum(axis=axis) + 1
        bad = np.flatnonzero(diff > color_budget + SLACK)
        if bad.size:
            raise CoverError(f"{name} vertex {int(bad[0])} sees {int(diff[bad[0]])} "
                             f"colors > c0*T^delta = {color_budget}")

    counts = np.bincount(h.colors.ravel(), minlength=t)
    # stable sort on (-count, color): smallest color id wins ties
    order = np.lexsort((np.arange(t), -counts))
    total = h.n_left * h.n_right
    chosen: list[int] = []
    picked: list[int] = []
    covered = 0
    for color in order:
        if _coverage_reached(covered, c1, total, strict=True):
            break
        if counts[color] == 0:
            raise CoverBoundViolation("ran out of colors before exceeding coverage")
        chosen.append(int(color))
        picked.append(int(counts[color]))
        covered += int(counts[color])

    c1f = float(c1)
    bound = c0 * c1f / ((1.0 - c0 * c2 - c1f) * c2) * (t ** (2.0 * delta))
    pick_floor = (1.0 - c0 * c2 - c1f) * c2 * total / (c0 * (t ** (2.0 * delta)))
    checks = {
        "coverage>c1*N^2": _coverage_reached(covered, c1, total, strict=True),
        "size<=ceil(bound)": len(chosen) <= math.ceil(bound - SLACK),
        "size<=floor(bound)+1": len(chosen) <= math.floor(bound + SLACK) + 1,
        "picks>=floor": all(d >= pick_floor - SLACK for d in picked),
        "picks-non-increasing": all(a >= b for a, b in zip(picked, picked[1:])),
    }
    result = CoverResult(chosen=chosen, covered=covered, steps=len(chosen), bound=bound,
                         pick_floor=pick_floor, picked=picked, checks=checks)
    if not all(checks.values()):
        raise CoverBoundViolation(f"greedy_color_cover postcondition failed: {checks}")
    return result
