"""Shared oracles and generators for the test suite.

The oracles here are deliberately independent of the library code paths
they check: TV by a direct half-L1 loop, smooth min-entropy by a linear
program over the smoothed distribution, conditional min-entropy by a direct
enumeration of prefixes.
"""

from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from blockcond.dist import Dist


def brute_tv(p: Dist, q: Dist) -> Fraction:
    """Half-L1 sum over every outcome of the full space."""
    acc = Fraction(0)
    for x in range(1 << p.bit_width):
        acc += abs(Fraction(p.prob(x)) - Fraction(q.prob(x)))
    return acc / 2


def lp_smooth_entropy(dist: Dist, eps: float) -> float:
    """Smooth min-entropy by linear programming.

    Minimize the cap z over smoothed distributions q within TV eps of the
    input.  Mass moved outside the support is aggregated into one variable
    w, spreadable evenly over the 2^t - S unused outcomes (each receiving
    w / (2^t - S) <= z).  Returns -log2(z*).
    """
    support = dist.support()
    s = len(support)
    outside = (1 << dist.bit_width) - s
    p = [float(dist.prob(x)) for x in support]
    # variables: q_0..q_{s-1}, r_0..r_{s-1}, w, z
    n_var = 2 * s + 2
    c = np.zeros(n_var)
    c[-1] = 1.0
    a_ub, b_ub = [], []

    def row():
        return np.zeros(n_var)

    for i in range(s):
        r = row()          # q_i - z <= 0
        r[i] = 1.0
        r[-1] = -1.0
        a_ub.append(r)
        b_ub.append(0.0)
        r = row()          # p_i - q_i - r_i <= 0
        r[i] = -1.0
        r[s + i] = -1.0
        a_ub.append(r)
        b_ub.append(-p[i])
        r = row()          # q_i - p_i - r_i <= 0
        r[i] = 1.0
        r[s + i] = -1.0
        a_ub.append(r)
        b_ub.append(p[i])
    r = row()              # (sum r_i + w) / 2 <= eps
    r[s:2 * s] = 0.5
    r[2 * s] = 0.5
    a_ub.append(r)
    b_ub.append(eps)
    r = row()              # w <= outside * z
    r[2 * s] = 1.0
    r[-1] = -outside
    a_ub.append(r)
    b_ub.append(0.0)
    a_eq = [row()]
    a_eq[0][:s] = 1.0
    a_eq[0][2 * s] = 1.0
    b_eq = [1.0]
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  A_eq=np.array(a_eq), b_eq=np.array(b_eq),
                  bounds=[(0, None)] * n_var, method="highs")
    assert res.success, res.message
    return -float(np.log2(res.x[-1]))


def conditional_min_entropy_oracle(joint: Dist, n: int, ell: int, index: int) -> float:
    """Worst-case conditional min-entropy of block `index` over reachable
    prefixes, by direct enumeration."""
    from blockcond.sources import pack_blocks, unpack_blocks

    groups: dict[int, dict[int, Fraction]] = {}
    for packed, mass in joint.mass.items():
        blocks = unpack_blocks(packed, ell, n)
        prefix = pack_blocks(blocks[: index - 1], n)
        groups.setdefault(prefix, {})
        groups[prefix][blocks[index - 1]] = \
            groups[prefix].get(blocks[index - 1], Fraction(0)) + Fraction(mass)
    worst = float("inf")
    for masses in groups.values():
        total = sum(masses.values())
        worst = min(worst, -float(np.log2(float(max(masses.values()) / total))))
    return worst


def random_dist(rng: np.random.Generator, t: int, support: int | None = None) -> Dist:
    """Random exact distribution with integer weights."""
    space = 1 << t
    support = support or rng.integers(1, space + 1)
    support = min(support, space)
    outcomes = rng.choice(space, size=support, replace=False)
    weights = rng.integers(1, 50, size=support)
    total = int(weights.sum())
    return Dist(t, {int(x): Fraction(int(w), total) for x, w in zip(outcomes, weights)})


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
