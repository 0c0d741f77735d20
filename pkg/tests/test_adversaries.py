import math
from fractions import Fraction

import numpy as np
import pytest

from blockcond.adversaries import (CertificateError, ConstructionError,
                                   EXTRACTION_BIAS_FLOOR, Nosf23Constants,
                                   build_1l_adversary, build_nosf23_adversary,
                                   build_shela23_extraction_adversary, delta_1l,
                                   extraction_c2, induced_split_function,
                                   partition_source, scale_up_reduction,
                                   split_blocks_reduction, verify_certificate)
from blockcond.dist import smooth_min_entropy
from blockcond.sources import (Adaptive, BlockFunctionTable, FiShelaDesc, Fixed,
                               NosfDesc, SourceError, exact_output_dist,
                               joint_block_dist, pack_blocks)


# -- (1, ell) bound -------------------------------------------------------------------

def test_1l_base_case_single_block(rng):
    f = BlockFunctionTable.random(3, 1, 4, rng)
    cert = build_1l_adversary(f, 0.1)
    assert cert.case == "base"
    assert cert.source.good == (1,)
    assert cert.oracle_entropy <= f.t + 1e-9
    assert cert.bound_bits <= f.t + math.log2(1 / 0.9) + 1e-9


def test_1l_constant_function_fixes_everything(rng):
    f = BlockFunctionTable.constant(2, 3, 4, 11)
    cert = build_1l_adversary(f, 0.1)
    assert cert.heavy_set == {11}
    assert cert.hit_prob == 1
    assert len([r for r in cert.levels if r["case"] == "fix"]) == 2


def test_1l_random_functions_meet_closed_form(rng):
    delta = delta_1l(0.1)
    for ell, count in ((2, 8), (3, 8)):
        for _ in range(count):
            f = BlockFunctionTable.random(3, ell, 6, rng)
            cert = build_1l_adversary(f, 0.1)
            assert cert.oracle_entropy <= 6 / ell + delta + 1e-9
            assert cert.bound_bits <= 6 / ell + delta + 1e-9
            assert len(cert.levels) <= ell  # recursion depth <= ell - 1 plus the leaf


def test_1l_certificate_is_reverified(rng):
    f = BlockFunctionTable.random(3, 2, 5, rng)
    cert = build_1l_adversary(f, 0.2)
    # tamper with the heavy set: verification must reject
    cert.heavy_set = frozenset(list(cert.heavy_set)[:-1] or [0])
    with pytest.raises(CertificateError):
        verify_certificate(cert, f)


def test_delta_1l_value():
    assert delta_1l(0.1) == pytest.approx(math.log2(2 * 1.1 / 0.81))


# -- reductions -----------------------------------------------------------------------

def test_scale_up_identity_when_c_is_1(rng):
    f = BlockFunctionTable.random(2, 3, 4, rng)
    h = scale_up_reduction(f, 1)
    for _ in range(20):
        blocks = tuple(int(v) for v in rng.integers(0, 4, size=3))
        assert h(blocks) == f(blocks)


def test_scale_up_parity_ignores_block_boundaries(rng):
    f = BlockFunctionTable(2, 4, 1, fn=lambda *bs: sum(bin(b).count("1") for b in bs) & 1)
    h = scale_up_reduction(f, 2)
    for _ in range(30):
        blocks = tuple(int(v) for v in rng.integers(0, 16, size=2))
        assert h(blocks) == sum(bin(b).count("1") for b in blocks) & 1


def test_scale_up_bit_exact_replay(rng):
    f = BlockFunctionTable.random(2, 4, 5, rng)
    h = scale_up_reduction(f, 2)
    for _ in range(500):
        b1, b2 = (int(v) for v in rng.integers(0, 16, size=2))
        subs = (b1 >> 2, b1 & 3, b2 >> 2, b2 & 3)
        assert h((b1, b2)) == f(subs)
    with pytest.raises(SourceError):
        scale_up_reduction(f, 3)


def test_partition_source_structure_and_joint(rng):
    table = tuple(int(v) for v in rng.integers(0, 16, size=16))
    src = FiShelaDesc(4, 2, (1,), {2: Adaptive(table)})
    split = partition_source(src, 2)
    assert split.n == 2 and split.ell == 4
    assert split.good == (1, 2)  # c * g good chunks
    # joint equality: chunked inner blocks == split source blocks
    for v in range(16):
        inner_blocks = src.resolve((v,))
        expect = []
        for b in inner_blocks:
            expect.extend((b >> 2, b & 3))
        assert split.resolve((v >> 2, v & 3)) == tuple(expect)


def test_split_blocks_exact_case(rng):
    # inner (1,2) over 4-bit blocks -> (2,4) over 2-bit blocks, no latent bits
    table = tuple(int(v) for v in rng.integers(0, 16, size=16))
    inner = FiShelaDesc(4, 2, (1,), {2: Adaptive(table)})
    out = split_blocks_reduction(inner, g=2, ell=4, m=2)
    assert out.good == (1, 2)
    f = BlockFunctionTable.random(2, 4, 5, rng)
    induced = induced_split_function(f, inner_n=4, ellp=2)
    assert exact_output_dist(f, out) == exact_output_dist(induced, inner)


def test_split_blocks_uniform_inner_all_good():
    inner = FiShelaDesc(4, 1, (1,), {})
    out = split_blocks_reduction(inner, g=2, ell=2, m=2)
    assert out.good == (1, 2) and not out.bad


def test_split_blocks_with_latent_bits(rng):
    """ell = 3 over ell' = 2 gives chunks of 2 and 1; with m = 2 the inner
    blocks expose 4 and 2 of their 6 bits.  Tables that factor through the
    exposed bits split exactly; others are refused."""
    n, m = 6, 2
    factoring = tuple((packed >> 2) & 3 for packed in range(1 << n))
    inner = FiShelaDesc(n, 2, (1,), {2: Adaptive(factoring)})
    out = split_blocks_reduction(inner, g=2, ell=3, m=m)
    assert out.good == (1, 2)
    f = BlockFunctionTable.random(m, 3, 4, rng)
    induced = induced_split_function(f, inner_n=n, ellp=2)
    assert exact_output_dist(f, out) == exact_output_dist(induced, inner)

    latent_reader = tuple(packed & 3 for packed in range(1 << n))
    bad_inner = FiShelaDesc(n, 2, (1,), {2: Adaptive(latent_reader)})
    with pytest.raises(SourceError, match="latent"):
        split_blocks_reduction(bad_inner, g=2, ell=3, m=m)


def test_split_blocks_rejects_wide_chunking():
    inner = FiShelaDesc(4, 2, (1,), {2: Fixed(0)})
    with pytest.raises(SourceError, match="chunking"):
        split_blocks_reduction(inner, g=2, ell=6, m=2)


def test_split_then_1l_composition(rng):
    """The composed pipeline: attack the induced (1,2) function, split the
    emitted source to (2,4), and confirm the certificate bound transfers."""
    eps = 0.1
    f = BlockFunctionTable.random(2, 4, 6, rng)
    induced = induced_split_function(f, inner_n=4, ellp=2)
    cert = build_1l_adversary(induced, eps)
    split = split_blocks_reduction(cert.source, g=2, ell=4, m=2)
    dist = exact_output_dist(f, split)
    assert dist.prob_of_set(cert.heavy_set) == cert.hit_prob
    assert smooth_min_entropy(dist, eps).entropy_bits <= cert.bound_bits + 1e-9


# -- (2,3)-NOSF bound -----------------------------------------------------------------

def test_nosf23_constants_at_zero():
    c = Nosf23Constants.from_eps(0)
    assert c.alpha == Fraction(1, 4)
    assert c.c0 == Fraction(1, 8)
    assert c.c2 == Fraction(9, 32)
    assert c.c4 == Fraction(15, 16)
    assert c.c0 == c.c5 * (1 - 2 * c.c2) ** 2  # chosen to meet case 1 exactly


@pytest.mark.parametrize("eps", [0, 0.05, 0.1, 0.2, 0.24])
def test_nosf23_constants_inequalities(eps):
    c = Nosf23Constants.from_eps(eps)
    assert c.eps < c.c0 <= 1
    assert c.eps < c.c2 * c.c4
    assert c.c4 < 1
    assert c.c2 < Fraction(1, 2)
    assert c.c0 <= c.c5 * (1 - 2 * c.c2) ** 2
    assert c.c3 * c.c6 + c.c5 < 1
    assert c.c1 == c.c3 * c.c5 / ((1 - c.c3 * c.c6 - c.c5) * c.c6)


def test_nosf23_constant_function_small_t_lands_in_case2():
    # at t = 6 the support threshold c3 T^(1/3) < 1, so even a constant
    # function satisfies the case-2 hypothesis with a singleton cover
    cert = build_nosf23_adversary(BlockFunctionTable.constant(4, 3, 6, 5), 0.1)
    assert cert.case == "case2-adaptive-3"
    assert cert.heavy_set == {5} and cert.hit_prob == 1


def test_nosf23_constant_function_large_t_lands_in_case1():
    cert = build_nosf23_adversary(BlockFunctionTable.constant(4, 3, 9, 37), 0.1)
    assert cert.case == "case1-fixed-1"
    assert cert.heavy_set == {37} and cert.hit_prob == 1
    assert isinstance(cert.source, FiShelaDesc)
    assert cert.source.bad[1] == Fixed(0)


def test_nosf23_case3_flagged_nosf_only(rng):
    # f echoes x2 and ignores x3: position-2 supports are full, position-3
    # supports are singletons, so case 3 fires and the source reads ahead
    f = BlockFunctionTable(3, 3, 9, fn=lambda a, b, c: b)
    cert = build_nosf23_adversary(f, 0.1)
    assert cert.case == "case3-adaptive-2"
    assert cert.nosf_only
    assert isinstance(cert.source, NosfDesc)
    assert not cert.source.fishela_compatible()


def test_nosf23_case4_colored_construction(rng):
    # f depends only on x1: both pair supports are singletons, so the
    # colored covering path must fire and fix block 1
    f = BlockFunctionTable(3, 3, 9, fn=lambda a, b, c: a * 57 % 512)
    cert = build_nosf23_adversary(f, 0.1)
    assert cert.case == "case1-fixed-1"
    assert len(cert.heavy_set) == 1  # one color covers everything


def test_nosf23_random_functions(rng):
    for _ in range(8):
        f = BlockFunctionTable.random(4, 3, 6, rng)
        cert = build_nosf23_adversary(f, 0.1)
        assert cert.oracle_entropy <= cert.bound_bits + 1e-9
        assert cert.oracle_entropy <= 2 * 6 / 3 + cert.delta_formula + 1e-9
        assert cert.formula_bound == pytest.approx(4 + cert.delta_formula)


def test_nosf23_rejects_bad_params(rng):
    f = BlockFunctionTable.random(4, 3, 6, rng)
    with pytest.raises(SourceError):
        build_nosf23_adversary(f, 0.3)
    with pytest.raises(SourceError):
        build_nosf23_adversary(BlockFunctionTable.random(2, 2, 4, rng), 0.1)


# -- (2,3)-SHELA extraction bound ------------------------------------------------------

def test_extraction_constants():
    assert extraction_c2() == Fraction(3, 5)
    assert min(Fraction(29, 50), Fraction(3, 5), extraction_c2()) - Fraction(1, 2) \
        == EXTRACTION_BIAS_FLOOR == Fraction(2, 25)


def test_extraction_constant_function():
    adv = build_shela23_extraction_adversary(BlockFunctionTable.constant(4, 3, 1, 0))
    assert adv.bias == Fraction(1, 2)


def test_extraction_case3_subcases():
    n = 3
    big = 1 << n
    # f = x1's low bit, regardless of x2/x3: every pair is forcing, the
    # pair graph is half 0-labeled and half 1-labeled, heavy vertices are
    # single-labeled -> fix block 1
    f = BlockFunctionTable(n, 3, 1, fn=lambda a, b, c: a & 1)
    adv = build_shela23_extraction_adversary(f)
    assert adv.case == "case3.2-fix-1"
    assert adv.bias == Fraction(1, 2)
    # f = parity(x1) ^ parity(x2): both labels split evenly, every vertex
    # is heavy and sees both labels -> adversary in position 2 forcing 0
    g = BlockFunctionTable(n, 3, 1, fn=lambda a, b, c: (a ^ b) & 1)
    adv2 = build_shela23_extraction_adversary(g)
    assert adv2.case == "case3.1-force-0"
    assert adv2.forced_bit == 0
    assert adv2.bias == Fraction(1, 2)
    assert adv2.source.good == (1, 3)


def test_extraction_random_functions(rng):
    for n in (4, 5):
        for _ in range(10):
            f = BlockFunctionTable.random(n, 3, 1, rng)
            adv = build_shela23_extraction_adversary(f)
            assert adv.bias >= EXTRACTION_BIAS_FLOOR
            assert abs(adv.oracle_p0 - Fraction(1, 2)) == adv.bias


def test_extraction_rejects_wide_output(rng):
    with pytest.raises(SourceError):
        build_shela23_extraction_adversary(BlockFunctionTable.random(3, 3, 2, rng))


def test_extraction_sources_are_fishela(rng):
    for _ in range(5):
        f = BlockFunctionTable.random(4, 3, 1, rng)
        adv = build_shela23_extraction_adversary(f)
        assert isinstance(adv.source, FiShelaDesc)
        adv.source.validate()
