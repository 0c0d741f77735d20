"""Adversarial source constructions behind the condensing/extraction lower
bounds, each emitting a certificate that is re-verified against the exact
output distribution before it is returned.

Every certificate follows the same schema: an adversarial source, a small
output set D, the exact probability that the source's output lands in D,
and the entropy bound log2(|D| / (p - eps)) that this event forces.  The
closed-form delta of the corresponding counting argument is stored next to
the (typically stronger) exact values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .covering import BipartiteGraph, ColoredCompleteBipartite, greedy_cover, greedy_color_cover
from .dist import Dist, smooth_min_entropy, tv_entropy_bound_check
from .sources import (Adaptive, BlockFunctionTable, FiShelaDesc, Fixed, GoodsTable,
                      NosfDesc, SourceError, exact_output_dist, pack_blocks,
                      unpack_blocks)


class ConstructionError(RuntimeError):
    """The case analysis failed to produce a source.  The underlying proofs
    guarantee one case always fires, so this is a bug report, not a fallback."""


class CertificateError(AssertionError):
    """Independent re-verification of an emitted certificate failed."""


@dataclass
class CondenseCertificate:
    source: FiShelaDesc | NosfDesc
    eps: float
    bound_bits: float
    heavy_set: frozenset[int]
    hit_prob: Fraction
    case: str
    delta_formula: float
    formula_bound: float
    theorem: str
    nosf_only: bool = False
    oracle_entropy: float | None = None
    levels: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "case": self.case,
            "eps": float(self.eps),
            "bound_bits": self.bound_bits,
            "delta_formula": self.delta_formula,
            "formula_bound": self.formula_bound,
            "oracle_entropy": self.oracle_entropy,
            "hit_prob": f"{self.hit_prob.numerator}/{self.hit_prob.denominator}",
            "heavy_set": sorted(self.heavy_set),
            "nosf_only": self.nosf_only,
            "levels": self.levels,
            "source": self.source.to_json(),
        }


def verify_certificate(cert: CondenseCertificate, f: BlockFunctionTable) -> Dist:
    """Recompute everything the certificate claims from scratch.

    exact output distribution -> heavy-set probability recount ->
    TV entropy bound -> smooth min-entropy below the bound.  Raises
    CertificateError on any mismatch; fills in the oracle entropy.
    """
    dist = exact_output_dist(f, cert.source)
    hit = dist.prob_of_set(cert.heavy_set)
    if hit != cert.hit_prob:
        raise CertificateError(f"hit probability recount {hit} != claimed {cert.hit_prob}")
    bound, holds = tv_entropy_bound_check(dist, cert.heavy_set, cert.eps)
    if not holds:
        raise CertificateError("tv_entropy_bound_check rejected the certificate")
    if abs(bound - cert.bound_bits) > 1e-9:
        raise CertificateError(f"bound recount {bound} != claimed {cert.bound_bits}")
    cert.oracle_entropy = smooth_min_entropy(dist, cert.eps).entropy_bits
    if cert.oracle_entropy > cert.bound_bits + 1e-9:
        raise CertificateError("oracle smooth min-entropy exceeds the certified bound")
    return dist


def _bound_bits(set_size: int, hit: Fraction, eps) -> float:
    gap = hit - Fraction(eps)
    return math.log2(set_size) - (math.log2(gap.numerator) - math.log2(gap.denominator))


# -- (1, ell) condensing bound ---------------------------------------------------

def delta_1l(eps: float) -> float:
    """Entropy-bound slack log2(2(1+eps)/(1-eps)^2) of the one-good-block
    chain (instantiating the extension step with c0 = 1, c1 = (1+eps)/2)."""
    return math.log2(2 * (1 + eps) / (1 - eps) ** 2)


def _best_prefix_certificate(dist: Dist, eps) -> tuple[frozenset[int], Fraction, float]:
    """The prefix heavy set (heaviest atoms first) minimizing
    log2(|D| / (Pr[D] - eps)); the full support is always a candidate."""
    eps = Fraction(eps)
    atoms = sorted(dist.mass.items(), key=lambda kv: (-kv[1], kv[0]))
    best = None
    acc = Fraction(0)
    chosen: list[int] = []
    for x, p in atoms:
        acc += p
        chosen.append(x)
        if acc > eps:
            bound = _bound_bits(len(chosen), acc, eps)
            if best is None or bound < best[2]:
                best = (frozenset(chosen), acc, bound)
    if best is None:
        raise ConstructionError("no event beats eps; distribution invalid")
    return best


def build_1l_adversary(f: BlockFunctionTable, eps: float) -> CondenseCertificate:
    """Adversarial uniform (1, ell)-fiSHELA source against which f cannot
    condense above rate 1/ell.

    Walks the extension argument top-down on the actual alphabet: while some
    first-block fixing shrinks the reachable output set below S^((l-1)/l),
    fix it and recurse on the induced function; otherwise the reachability
    graph has high left degrees, and the greedy cover yields a small output
    set D plus an adaptive suffix steering a c1 = (1+eps)/2 fraction of good
    values into D.  The final certificate bound never exceeds
    t/ell + delta_1l(eps).
    """
    if not 0 <= eps < 1:
        raise SourceError("eps must lie in [0, 1)")
    n = f.n
    big_n = 1 << n
    cur = f.dense()
    ell_cur = f.ell
    prefix: list[int] = []
    levels: list[dict] = []
    c1 = Fraction(1 + Fraction(eps), 2)

    while True:
        alphabet = np.unique(cur)
        s_size = int(alphabet.size)
        if ell_cur == 1:
            counts = {int(v): int(c) for v, c in
                      zip(*np.unique(cur, return_counts=True))}
            dist = Dist.from_counts(f.t, counts, cur.size)
            heavy, hit, bound = _best_prefix_certificate(dist, eps)
            good_pos = len(prefix) + 1
            bad = {i + 1: Fixed(v) for i, v in enumerate(prefix)}
            source = FiShelaDesc(n, f.ell, (good_pos,), bad)
            levels.append({"ell": 1, "case": "base", "alphabet_bits": math.log2(s_size)})
            case = "base" if not prefix else "fixed-chain"
            break

        rows = cur.reshape(big_n, -1)
        row_supports = [np.unique(rows[x]) for x in range(big_n)]
        sizes = np.array([rs.size for rs in row_supports])
        # case split: exists x with |support|^l <= S^(l-1)  (c0 = 1, exact in ints)
        shrinkers = [x for x in range(big_n)
                     if int(sizes[x]) ** ell_cur <= s_size ** (ell_cur - 1)]
        if shrinkers:
            x_star = min(shrinkers, key=lambda x: (int(sizes[x]), x))
            levels.append({"ell": ell_cur, "case": "fix", "fixed_value": int(x_star),
                           "alphabet_bits": math.log2(s_size),
                           "support_after": int(sizes[x_star])})
            prefix.append(int(x_star))
            cur = rows[x_star]
            ell_cur -= 1
            continue

        # covering case: left = first-block values, right = current alphabet
        compact = {int(v): j for j, v in enumerate(alphabet)}
        adjacency = [sorted(compact[int(v)] for v in row_supports[x]) for x in range(big_n)]
        graph = BipartiteGraph(big_n, s_size, adjacency)
        delta_cover = (ell_cur - 1) / ell_cur
        cover = greedy_cover(graph, c0=1.0, delta=delta_cover, c1=c1)
        chosen_vals = {int(alphabet[j]) for j in cover.chosen}

        in_d = np.isin(rows, sorted(chosen_vals))
        any_hit = in_d.any(axis=1)
        first_hit = in_d.argmax(axis=1)
        witness = np.where(any_hit, first_hit, 0)

        good_pos = len(prefix) + 1
        bad: dict[int, Fixed | Adaptive] = {i + 1: Fixed(v) for i, v in enumerate(prefix)}
        suffix_len = ell_cur - 1
        for r in range(suffix_len):
            pos = good_pos + 1 + r
            table = []
            for packed in range(1 << (n * (pos - 1))):
                blocks = unpack_blocks(packed, pos - 1, n)
                x = blocks[good_pos - 1]
                sfx = unpack_blocks(int(witness[x]), suffix_len, n)
                table.append(sfx[r])
            bad[pos] = Adaptive(tuple(table))
        source = FiShelaDesc(n, f.ell, (good_pos,), bad)

        landed = rows[np.arange(big_n), witness]
        hits = int(np.isin(landed, sorted(chosen_vals)).sum())
        hit = Fraction(hits, big_n)
        heavy = frozenset(chosen_vals)
        bound = _bound_bits(len(heavy), hit, eps)
        levels.append({"ell": ell_cur, "case": "cover",
                       "alphabet_bits": math.log2(s_size),
                       "cover_size": len(chosen_vals), "coverage": cover.covered})
        case = "cover" if not prefix else "fixed-chain+cover"
        break

    # verbatim delta' recursion with c0 = 1 (so the recurse term carries no
    # log(c0) g/ell correction), surfacing both terms per extension level
    cover_term = math.log2(float(c1) / ((1 - float(c1)) * (float(c1) - eps)))
    delta_chain = 0.0
    for rec in reversed(levels):
        if rec["case"] == "base":
            delta_chain = math.log2(1 / (1 - eps))
        elif rec["case"] == "cover":
            delta_chain = cover_term
        else:
            rec["delta_terms"] = {"cover": cover_term, "recurse": delta_chain}
            delta_chain = max(cover_term, delta_chain)
    delta = delta_1l(eps)
    cert = CondenseCertificate(
        source=source, eps=eps, bound_bits=bound, heavy_set=heavy, hit_prob=hit,
        case=case, delta_formula=delta, formula_bound=f.t / f.ell + delta,
        theorem="no-condensing-(1,ell)-fishela", levels=levels)
    verify_certificate(cert, f)
    return cert


# -- reductions -------------------------------------------------------------------

def scale_up_reduction(f: BlockFunctionTable, c: int) -> BlockFunctionTable:
    """Induced function on ell0 = ell/c blocks of width c*n that partitions
    each block into c sub-blocks (consecutive, most significant first) and
    calls f."""
    if f.ell % c:
        raise SourceError(f"c={c} does not divide ell={f.ell}")
    ell0 = f.ell // c
    w = f.n
    big_w = c * w
    mask = (1 << w) - 1

    def h(*blocks: int) -> int:
        subs = []
        for b in blocks:
            subs.extend((b >> (w * (c - 1 - j))) & mask for j in range(c))
        return f(subs)

    return BlockFunctionTable(big_w, ell0, f.t, fn=h)


def partition_source(desc: FiShelaDesc, c: int) -> FiShelaDesc:
    """Split each n-bit block into c consecutive (n/c)-bit sub-blocks,
    turning a (g, ell) source into a (c*g, c*ell) source over width n/c."""
    if desc.n % c:
        raise SourceError(f"c={c} does not divide n={desc.n}")
    w = desc.n // c
    mask = (1 << w) - 1

    def chunk(value: int, j: int) -> int:
        return (value >> (w * (c - 1 - j))) & mask

    good = []
    bad: dict[int, Fixed | Adaptive] = {}
    for i in range(1, desc.ell + 1):
        base = (i - 1) * c
        if i in desc.good:
            good.extend(base + j + 1 for j in range(c))
            continue
        b = desc.bad[i]
        for j in range(c):
            pos = base + j + 1
            if isinstance(b, Fixed):
                bad[pos] = Fixed(chunk(b.value, j))
            else:
                table = []
                for packed in range(1 << (w * (pos - 1))):
                    subs = unpack_blocks(packed, pos - 1, w)
                    full_prefix = pack_blocks(
                        [pack_blocks(subs[k * c:(k + 1) * c], w) for k in range(i - 1)],
                        desc.n)
                    table.append(chunk(b.table[full_prefix], j))
                bad[pos] = Adaptive(tuple(table))
    return FiShelaDesc(w, desc.ell * c, good, bad)


def _used_bits(value: int, n: int, used: int) -> int:
    return value >> (n - used)


def split_blocks_reduction(inner: FiShelaDesc, g: int, ell: int, m: int) -> FiShelaDesc:
    """Re-expose an inner (1, ell')-source over n-bit blocks as a (g, ell)
    source over m-bit blocks by carving each inner block into consecutive
    m-bit chunks, the first ell mod ell' blocks contributing one extra chunk.

    Bits of an inner block beyond its chunks are latent: they never appear
    in the output source, so every adaptive table of the inner source must
    factor through the exposed bits of earlier blocks (verified; the sources
    built by build_1l_adversary satisfy this by canonical witness choice).
    The good block must yield at least g chunks.
    """
    n, ellp = inner.n, inner.ell
    c, r = divmod(ell, ellp)
    if c < 1:
        raise SourceError("need ell >= inner.ell")
    chunks = [c + 1 if j <= r else c for j in range(1, ellp + 1)]
    if max(chunks) * m > n:
        raise SourceError(f"chunking needs ceil(ell/ell')*m <= n, got {max(chunks)}*{m} > {n}")
    used = [k * m for k in chunks]

    if inner.g != 1:
        raise SourceError("split_blocks_reduction expects a single-good-block inner source")
    j_good = inner.good[0]
    if chunks[j_good - 1] < g:
        raise SourceError(f"good block yields {chunks[j_good - 1]} chunks < g={g}")

    # verify adaptive tables factor through exposed prefix bits
    for i, b in inner.bad.items():
        if not isinstance(b, Adaptive):
            continue
        seen: dict[int, int] = {}
        for packed in range(len(b.table)):
            blocks = unpack_blocks(packed, i - 1, n)
            key = pack_blocks([_used_bits(v, n, used[j]) for j, v in enumerate(blocks)],
                              max(used) or 1)
            prev = seen.get(key)
            if prev is None:
                seen[key] = b.table[packed]
            elif prev != b.table[packed]:
                raise SourceError(
                    f"inner bad block {i} reads latent bits; cannot split deterministically")

    offsets = [0]
    for k in chunks:
        offsets.append(offsets[-1] + k)

    def chunk_of(value: int, j: int, idx: int) -> int:
        """idx-th m-bit chunk (0-based, most significant first) of block j."""
        return (value >> (n - (idx + 1) * m)) & ((1 << m) - 1)

    good_out = [offsets[j_good - 1] + t + 1 for t in range(chunks[j_good - 1])]
    bad_out: dict[int, Fixed | Adaptive] = {}
    for j in range(1, ellp + 1):
        if j == j_good:
            continue
        b = inner.bad[j]
        for t in range(chunks[j - 1]):
            pos = offsets[j - 1] + t + 1
            if isinstance(b, Fixed):
                bad_out[pos] = Fixed(chunk_of(b.value, j, t))
                continue
            table = []
            for packed in range(1 << (m * (pos - 1))):
                outs = unpack_blocks(packed, pos - 1, m)
                inner_prefix = []
                for jj in range(1, j):
                    vals = outs[offsets[jj - 1]:offsets[jj]]
                    exposed = pack_blocks(vals, m)
                    inner_prefix.append(exposed << (n - used[jj - 1]))
                value = b.table[pack_blocks(inner_prefix, n)]
                table.append(chunk_of(value, j, t))
            bad_out[pos] = Adaptive(tuple(table))
    return FiShelaDesc(m, ell, good_out, bad_out)


def induced_split_function(f: BlockFunctionTable, inner_n: int, ellp: int) -> BlockFunctionTable:
    """The function on ell' blocks of width inner_n obtained by carving each
    block into f's m-bit chunks (the inverse view of split_blocks_reduction)."""
    c, r = divmod(f.ell, ellp)
    chunks = [c + 1 if j <= r else c for j in range(1, ellp + 1)]
    m = f.n

    def fn(*blocks: int) -> int:
        out = []
        for j, v in enumerate(blocks):
            for t in range(chunks[j]):
                out.append((v >> (inner_n - (t + 1) * m)) & ((1 << m) - 1))
        return f(out)

    return BlockFunctionTable(inner_n, ellp, f.t, fn=fn)


# -- (2,3)-NOSF condensing bound ---------------------------------------------------

@dataclass(frozen=True)
class Nosf23Constants:
    """Case-analysis constants for the (2,3)-NOSF bound, exact rationals.

    alpha = 1/4 - eps; c0 = 1/4 - alpha/2; c2 = 1/4 + alpha/8;
    c4 = 1 - alpha/4; c5 = c0 / (1/4 + alpha^2/16 - alpha/4);
    c3 = c6 = 1 - c5; c1 = c3 c5 / ((1 - c3 c6 - c5) c6).
    """

    eps: Fraction
    alpha: Fraction
    c0: Fraction
    c1: Fraction
    c2: Fraction
    c3: Fraction
    c4: Fraction
    c5: Fraction
    c6: Fraction

    @classmethod
    def from_eps(cls, eps) -> "Nosf23Constants":
        eps = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
        if not 0 <= eps < Fraction(1, 4):
            raise SourceError("eps must lie in [0, 1/4)")
        alpha = Fraction(1, 4) - eps
        c0 = Fraction(1, 4) - alpha / 2
        c2 = Fraction(1, 4) + alpha / 8
        c4 = 1 - alpha / 4
        c5 = c0 / (Fraction(1, 4) + alpha ** 2 / 16 - alpha / 4)
        c3 = 1 - c5
        c6 = 1 - c5
        c1 = c3 * c5 / ((1 - c3 * c6 - c5) * c6)
        consts = cls(eps, alpha, c0, c1, c2, c3, c4, c5, c6)
        consts.check()
        return consts

    def check(self) -> None:
        ok = (self.eps < self.c0 <= 1
              and self.eps < self.c2 * self.c4
              and self.c4 < 1
              and self.c2 < Fraction(1, 2)
              and self.c0 <= self.c5 * (1 - 2 * self.c2) ** 2
              and self.c3 * self.c6 + self.c5 < 1)
        if not ok:
            raise ConstructionError(f"constant inequalities violated: {self}")


def _distinct_along_last(arr: np.ndarray) -> np.ndarray:
    srt = np.sort(arr, axis=-1)
    return (np.diff(srt, axis=-1) != 0).sum(axis=-1) + 1


def _support_ge(sizes: np.ndarray, c: Fraction, t_bits: int) -> np.ndarray:
    """Exact integer test  sizes >= c * T^(1/3)  via  sizes^3 den^3 >= num^3 T."""
    lhs = sizes.astype(object) ** 3 * c.denominator ** 3
    return lhs >= c.numerator ** 3 * (1 << t_bits)


def build_nosf23_adversary(f: BlockFunctionTable, eps: float) -> CondenseCertificate:
    """Uniform (2,3)-NOSF source against which f cannot condense above
    rate 2/3.

    Deterministic case order: adversary in position 3 (many pairs keep a
    large reachable set over the third block), the symmetric position-2
    variant (NOSF-only: the bad block reads a later one), and otherwise the
    color-covering construction that pins block 1 to a single value z1 and
    covers a c0 fraction of (x2, x3) pairs with few output colors.
    """
    if f.ell != 3:
        raise SourceError("this construction targets ell = 3")
    if not 0 < eps < 0.25:
        raise SourceError("eps must lie in (0, 1/4)")
    if f.n > 7:
        raise SourceError("N^3 evaluation budget requires n <= 7")
    consts = Nosf23Constants.from_eps(eps)
    n, t = f.n, f.t
    big_n, big_t = 1 << n, 1 << t
    arr = f.as_array()

    supp3 = _distinct_along_last(arr)                      # over y3, per (x1,x2)
    supp2 = _distinct_along_last(arr.transpose(0, 2, 1))   # over y2, per (x1,x3)
    p12 = _support_ge(supp3, consts.c3, t)
    p13 = _support_ge(supp2, consts.c3, t)

    def pair_case(view: np.ndarray, mask: np.ndarray) -> tuple:
        pairs = np.argwhere(mask)
        adjacency = [sorted(int(v) for v in np.unique(view[a, b])) for a, b in pairs]
        graph = BipartiteGraph(len(pairs), big_t, adjacency)
        cover = greedy_cover(graph, c0=float(consts.c3), delta=1.0 / 3.0, c1=consts.c4)
        chosen = sorted(cover.chosen)
        in_d = np.isin(view, chosen)
        any_hit = in_d.any(axis=2)
        witness = np.where(any_hit, in_d.argmax(axis=2), 0)
        hits = int(any_hit.sum())
        return chosen, witness, hits

    delta_case23 = math.log2(float(consts.c4) / ((1 - float(consts.c4)) * float(consts.c3)
                                                 * (float(consts.c2 * consts.c4) - eps)))

    count12 = int(p12.sum())
    count13 = int(p13.sum())
    threshold_pairs = consts.c2 * big_n * big_n

    if count12 * threshold_pairs.denominator >= threshold_pairs.numerator:
        chosen, witness, hits = pair_case(arr, p12)
        table = tuple(int(witness[x1, x2]) for x1 in range(big_n) for x2 in range(big_n))
        source: FiShelaDesc | NosfDesc = FiShelaDesc(n, 3, (1, 2), {3: Adaptive(table)})
        case, nosf_only, delta = "case2-adaptive-3", False, delta_case23
    elif count13 * threshold_pairs.denominator >= threshold_pairs.numerator:
        view = arr.transpose(0, 2, 1)
        chosen, witness, hits = pair_case(view, p13)
        table = tuple(int(witness[x1, x3]) for x1 in range(big_n) for x3 in range(big_n))
        source = NosfDesc(n, 3, (1, 3), {2: GoodsTable(table)})
        case, nosf_only, delta = "case3-adaptive-2", True, delta_case23
    else:
        q12 = ~p12
        q13 = ~p13
        scores = q12.sum(axis=1) + q13.sum(axis=1)
        z1 = int(scores.argmax())
        p2 = np.flatnonzero(q12[z1])
        p3 = np.flatnonzero(q13[z1])
        floor = (1 - 2 * consts.c2) * big_n
        for name, side in (("P2", p2), ("P3", p3)):
            if side.size * floor.denominator < floor.numerator:
                raise ConstructionError(
                    f"{name} smaller than (1-2c2)N at z1={z1}; case analysis failed")
        trim = min(p2.size, p3.size)
        p2, p3 = p2[:trim], p3[:trim]
        colors = arr[z1][np.ix_(p2, p3)]
        h = ColoredCompleteBipartite(trim, trim, big_t, colors)
        cover = greedy_color_cover(h, c0=float(consts.c3), c1=consts.c5,
                                   c2=float(consts.c6), delta=1.0 / 3.0)
        chosen = sorted(cover.chosen)
        hits = int(np.isin(arr[z1], chosen).sum())
        source = FiShelaDesc(n, 3, (2, 3), {1: Fixed(z1)})
        case, nosf_only = "case1-fixed-1", False
        delta = math.log2(float(consts.c1) / (float(consts.c0) - eps))

    hit = Fraction(hits, big_n * big_n)
    if hit <= Fraction(eps):
        raise ConstructionError("hit probability does not clear eps; case analysis failed")
    heavy = frozenset(int(z) for z in chosen)
    cert = CondenseCertificate(
        source=source, eps=eps, bound_bits=_bound_bits(len(heavy), hit, eps),
        heavy_set=heavy, hit_prob=hit, case=case, delta_formula=delta,
        formula_bound=2.0 * t / 3.0 + delta, theorem="no-condensing-(2,3)-nosf",
        nosf_only=nosf_only)
    verify_certificate(cert, f)
    return cert


# -- (2,3)-SHELA extraction bound ---------------------------------------------------

EXTRACTION_C0 = Fraction(29, 50)
EXTRACTION_C1 = Fraction(3, 5)
EXTRACTION_BIAS_FLOOR = Fraction(2, 25)


def extraction_c2(c0: Fraction = EXTRACTION_C0, c1: Fraction = EXTRACTION_C1) -> Fraction:
    return (2 * (1 - c0) - c1) / (1 - c1)


@dataclass
class ExtractionAdversary:
    source: FiShelaDesc
    bias: Fraction
    case: str
    forced_bit: int
    oracle_p0: Fraction

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "forced_bit": self.forced_bit,
            "bias": f"{self.bias.numerator}/{self.bias.denominator}",
            "bias_float": float(self.bias),
            "source": self.source.to_json(),
        }


def build_shela23_extraction_adversary(f: BlockFunctionTable) -> ExtractionAdversary:
    """Uniform (2,3)-SHELA source on which the one-bit f has bias >= 0.08.

    Pair classes: S_b = pairs (x1,x2) forcing output b for every x3, S_01 =
    the rest.  Either a position-3 adversary forces a fixed bit on a c0
    fraction of pairs, or the labeled pair graph has a c2 fraction of heavy
    left vertices and the adversary sits in position 2 (every heavy vertex
    sees both labels) or position 1 (some heavy vertex is single-labeled;
    the 0-forcing branch is preferred on ties).
    """
    if f.t != 1:
        raise SourceError("extraction bound targets t = 1")
    n = f.n
    big_n = 1 << n
    arr = f.as_array()
    row_sum = arr.sum(axis=2)
    s0 = row_sum == 0
    s1 = row_sum == big_n
    s01 = ~(s0 | s1)
    c0, c1 = EXTRACTION_C0, EXTRACTION_C1
    c2 = extraction_c2()
    pairs_total = big_n * big_n

    def reaches(mask_count: int, c: Fraction) -> bool:
        return mask_count * c.denominator >= c.numerator * pairs_total

    if reaches(int((s0 | s01).sum()), c0):
        witness = np.where(s0 | s01, (arr == 0).argmax(axis=2), 0)
        table = tuple(int(witness[a, b]) for a in range(big_n) for b in range(big_n))
        source = FiShelaDesc(n, 3, (1, 2), {3: Adaptive(table)})
        case, forced = "case1-force-0", 0
    elif reaches(int((s1 | s01).sum()), c0):
        witness = np.where(s1 | s01, (arr == 1).argmax(axis=2), 0)
        table = tuple(int(witness[a, b]) for a in range(big_n) for b in range(big_n))
        source = FiShelaDesc(n, 3, (1, 2), {3: Adaptive(table)})
        case, forced = "case2-force-1", 1
    else:
        deg = (s0 | s1).sum(axis=1)
        heavy = deg * c1.denominator > c1.numerator * big_n
        if int(heavy.sum()) * c2.denominator < c2.numerator * big_n:
            raise ConstructionError("heavy-vertex count below c2*N; case analysis failed")
        has0 = s0.any(axis=1)
        has1 = s1.any(axis=1)
        zero_only = heavy & has0 & ~has1
        one_only = heavy & has1 & ~has0
        if zero_only.any() or one_only.any():
            if zero_only.any():
                u, forced = int(zero_only.argmax()), 0
            else:
                u, forced = int(one_only.argmax()), 1
            source = FiShelaDesc(n, 3, (2, 3), {1: Fixed(u)})
            case = "case3.2-fix-1"
        else:
            witness = np.where(heavy, s0.argmax(axis=1), 0)
            table = tuple(int(v) for v in witness)
            source = FiShelaDesc(n, 3, (1, 3), {2: Adaptive(table)})
            case, forced = "case3.1-force-0", 0

    dist = exact_output_dist(f, source)
    p0 = Fraction(dist.prob(0))
    bias = abs(p0 - Fraction(1, 2))
    if bias < EXTRACTION_BIAS_FLOOR:
        raise CertificateError(f"constructed source has bias {bias} < 0.08")
    return ExtractionAdversary(source=source, bias=bias, case=case,
                               forced_bit=forced, oracle_p0=p0)
