import json
from fractions import Fraction

import numpy as np
import pytest

from blockcond.dist import Dist, tv_distance
from blockcond.sources import (Adaptive, BlockFunctionTable, FiShelaDesc, Fixed,
                               GoodsTable, NosfDesc, ShelaDesc, SourceError,
                               check_almost_cg, check_almost_cg_joint, decompose_shela,
                               desc_from_json, dump_function_file, exact_output_dist,
                               joint_block_dist, load_function_file, pack_blocks,
                               sample, unpack_blocks)
from conftest import conditional_min_entropy_oracle


from hypothesis import given, settings
from hypothesis import strategies as st


def test_pack_unpack_roundtrip(rng):
    for _ in range(20):
        blocks = tuple(int(v) for v in rng.integers(0, 8, size=4))
        assert unpack_blocks(pack_blocks(blocks, 3), 4, 3) == blocks
    assert pack_blocks((0b101, 0b010), 3) == 0b101010  # block 1 most significant


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.data())
def test_pack_unpack_property(n, data):
    count = data.draw(st.integers(1, 4))
    blocks = tuple(data.draw(st.integers(0, (1 << n) - 1)) for _ in range(count))
    packed = pack_blocks(blocks, n)
    assert packed < 1 << (n * count)
    assert unpack_blocks(packed, count, n) == blocks


def test_block_function_table_modes(rng):
    table = BlockFunctionTable.random(2, 2, 3, rng)
    fn = BlockFunctionTable(2, 2, 3, fn=lambda a, b: table((a, b)))
    for a in range(4):
        for b in range(4):
            assert table((a, b)) == fn((a, b))
    assert (fn.dense() == table.dense()).all()
    with pytest.raises(SourceError):
        BlockFunctionTable(2, 2, 3, table=np.zeros(7))
    with pytest.raises(SourceError):
        table((1, 2, 3))


def random_fishela(rng, n, ell, g) -> FiShelaDesc:
    good = sorted(rng.choice(range(1, ell + 1), size=g, replace=False).tolist())
    bad = {}
    for i in range(1, ell + 1):
        if i in good:
            continue
        if rng.random() < 0.4:
            bad[i] = Fixed(int(rng.integers(0, 1 << n)))
        else:
            size = 1 << (n * (i - 1))
            bad[i] = Adaptive(tuple(int(v) for v in rng.integers(0, 1 << n, size=size)))
    return FiShelaDesc(n, ell, good, bad)


def test_exact_output_dist_projection_uniform():
    f = BlockFunctionTable(2, 3, 2, fn=lambda a, b, c: a)
    src = FiShelaDesc(2, 3, (1, 2, 3), {})
    assert exact_output_dist(f, src) == Dist.uniform(2)


def test_exact_output_dist_fixed_block_point_mass():
    f = BlockFunctionTable(2, 3, 2, fn=lambda a, b, c: c)
    src = FiShelaDesc(2, 3, (1, 2), {3: Fixed(3)})
    assert exact_output_dist(f, src) == Dist.point(2, 3)


def test_exact_output_dist_monte_carlo_crosscheck(rng):
    f = BlockFunctionTable.random(2, 3, 3, rng)
    src = random_fishela(rng, 2, 3, 2)
    dist = exact_output_dist(f, src)
    n_samples = 100_000
    counts = np.zeros(8, dtype=np.int64)
    for _ in range(n_samples):
        counts[f(sample(src, rng))] += 1
    for z in range(8):
        p = float(dist.prob(z))
        sigma = max((p * (1 - p) / n_samples) ** 0.5, 1e-9)
        assert abs(counts[z] / n_samples - p) <= 4 * sigma + 1e-9


def test_adaptive_table_reads_prefix_only():
    # the adaptive table's domain is exactly the earlier blocks
    with pytest.raises(SourceError):
        FiShelaDesc(2, 2, (1,), {2: Adaptive(tuple([0] * 3))})
    src = FiShelaDesc(2, 2, (1,), {2: Adaptive((3, 2, 1, 0))})
    assert src.resolve((0,)) == (0, 3)
    assert src.resolve((3,)) == (3, 0)


def test_nosf_desc_resolution_and_flag():
    table = tuple(v % 4 for v in range(16))
    src = NosfDesc(2, 3, (1, 3), {2: GoodsTable(table)})
    assert not src.fishela_compatible()  # block 2 reads good block 3
    packed = pack_blocks((1, 2), 2)
    assert src.resolve((1, 2)) == (1, table[packed], 2)
    late = NosfDesc(2, 3, (1, 2), {3: GoodsTable(table)})
    assert late.fishela_compatible()


def make_shela(rng, n=2, ell=3, g=2, tuples=((1, 2), (1, 3))) -> ShelaDesc:
    weights = [Fraction(1, len(tuples))] * len(tuples)
    per = {}
    for idx in tuples:
        bad_index = next(i for i in range(1, ell + 1) if i not in idx)
        size = 1 << (n * (bad_index - 1))
        per[idx] = FiShelaDesc(
            n, ell, idx,
            {bad_index: Adaptive(tuple(int(v) for v in rng.integers(0, 1 << n, size=size)))})
    return ShelaDesc(n, ell, g, list(zip(tuples, weights)), per)


def test_decompose_single_tuple(rng):
    s = make_shela(rng, tuples=((1, 2),))
    parts = decompose_shela(s)
    assert len(parts) == 1 and parts[0][0] == 1


def test_decompose_mixture_identity_exact(rng):
    f = BlockFunctionTable.random(2, 3, 3, rng)
    for _ in range(10):
        s = make_shela(rng, tuples=((1, 2), (1, 3), (2, 3)))
        parts = decompose_shela(s)
        mixture: dict[int, Fraction] = {}
        for w, comp in parts:
            for z, p in exact_output_dist(f, comp).mass.items():
                mixture[z] = mixture.get(z, Fraction(0)) + w * p
        assert Dist(3, mixture) == exact_output_dist(f, s)


def test_shela_validation():
    with pytest.raises(SourceError):
        ShelaDesc(2, 3, 2, [((1, 2), Fraction(1, 2))], {})


def test_check_almost_cg_uniform_fishela(rng):
    # the equivalence: a uniform fiSHELA source is uniform almost-CG with k = n
    for _ in range(10):
        src = random_fishela(rng, 2, 3, 2)
        assert check_almost_cg(src, src.n)
        assert not check_almost_cg(src, src.n + 0.5)


def test_check_almost_cg_detects_copying_block():
    # a joint where the claimed-good block 2 copies block 1
    mass = {pack_blocks((a, a), 2): Fraction(1, 4) for a in range(4)}
    joint = Dist(4, mass)
    assert not check_almost_cg_joint(joint, 2, 2, good=[1, 2], k=1)
    assert check_almost_cg_joint(joint, 2, 2, good=[1], k=2)


def test_check_almost_cg_matches_oracle(rng):
    for _ in range(15):
        src = random_fishela(rng, 2, 3, int(rng.integers(1, 3)))
        joint = joint_block_dist(src)
        k = float(rng.choice([0.5, 1.0, 1.5, 2.0]))
        oracle = all(conditional_min_entropy_oracle(joint, 2, 3, i) >= k - 1e-9
                     for i in src.good)
        assert check_almost_cg(src, k) == oracle


def test_sample_reproducible_and_marginals(rng):
    src = FiShelaDesc(2, 3, (1, 3), {2: Fixed(1)})
    a = [sample(src, np.random.default_rng(5)) for _ in range(10)]
    b = [sample(src, np.random.default_rng(5)) for _ in range(10)]
    assert a == b
    draws = np.array([sample(src, rng) for _ in range(100_000)])
    assert (draws[:, 1] == 1).all()
    for col in (0, 2):
        counts = np.bincount(draws[:, col], minlength=4)
        sigma = (100_000 * 0.25 * 0.75) ** 0.5
        assert (abs(counts - 25_000) <= 4 * sigma).all()


def test_desc_json_roundtrip(rng):
    src = random_fishela(rng, 2, 3, 2)
    again = desc_from_json(json.dumps(src.to_json()))
    assert again.good == src.good and again.bad == src.bad
    nosf = NosfDesc(2, 3, (1, 3), {2: GoodsTable(tuple(v % 4 for v in range(16)))})
    again = desc_from_json(nosf.to_json())
    assert isinstance(again, NosfDesc) and again.bad == nosf.bad


def test_function_file_roundtrip(tmp_path, rng):
    f = BlockFunctionTable.random(3, 2, 6, rng)
    path = tmp_path / "fn.bin"
    dump_function_file(f, str(path))
    g = load_function_file(str(path), 3, 2, 6)
    assert (g.dense() == f.dense()).all()


def test_output_dist_invariant_under_representation(rng):
    """Table-backed and callback-backed versions of the same adversary give
    the same exact output distribution."""
    f = BlockFunctionTable.random(2, 3, 3, rng)
    table = tuple(int(v) for v in rng.integers(0, 4, size=16))
    src_table = FiShelaDesc(2, 3, (1, 2), {3: Adaptive(table)})
    dist_a = exact_output_dist(f, src_table)

    class CallbackDesc(FiShelaDesc):
        def resolve(self, goods):
            a, b = goods
            return (a, b, table[pack_blocks((a, b), 2)])

    src_cb = CallbackDesc(2, 3, (1, 2), {3: Adaptive(table)})
    assert dist_a == exact_output_dist(f, src_cb)
