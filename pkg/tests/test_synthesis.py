import numpy as np
import pytest

from polarkit.channels import (
    ChannelDescriptor,
    DmcTable,
    bec,
    bhattacharyya,
    bsc,
    is_bec_table,
    random_table,
    symmetric_capacity,
)
from polarkit.synthesis import (
    ResourceLimitError,
    UnsupportedChannelError,
    bec_path_capacity,
    bec_profile,
    brute_force_split,
    single_step,
    symmetric_z,
    synthesize_exact,
)

from conftest import random_bec_like

DYADIC_N8 = (0.99609375, 0.87890625, 0.80859375, 0.31640625,
             0.68359375, 0.19140625, 0.12109375, 0.00390625)


def test_bsc_single_step_values():
    minus, plus = single_step(bsc(0.1))
    z = bhattacharyya(bsc(0.1))
    assert z == pytest.approx(0.6)
    assert bhattacharyya(plus) == pytest.approx(0.36, abs=1e-12)
    assert bhattacharyya(minus) < 2 * z - z * z
    assert minus.y_count == 4 and plus.y_count == 8


def test_bec_single_step_is_bec_with_squared_erasure():
    minus, plus = single_step(bec(0.5))
    assert bhattacharyya(plus) == 0.25
    assert bhattacharyya(minus) == 0.75
    assert is_bec_table(minus) and is_bec_table(plus)


@pytest.mark.parametrize("w", [bec(0.3), bsc(0.1), DmcTable([0.6, 0.3, 0.1], [0.05, 0.25, 0.7])])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_recursive_tables_equal_definition(w, n):
    for i in range(1, (1 << n) + 1):
        a = synthesize_exact(w, n, i)
        b = brute_force_split(w, n, i)
        assert a.rows.shape == b.rows.shape
        assert np.max(np.abs(a.rows - b.rows)) <= 1e-12


def test_first_level_is_the_single_step():
    w = bsc(0.2)
    minus, plus = single_step(w)
    assert np.allclose(synthesize_exact(w, 1, 1).rows, minus.rows, atol=1e-15)
    assert np.allclose(synthesize_exact(w, 1, 2).rows, plus.rows, atol=1e-15)


def test_capacity_is_conserved_along_levels():
    w = bsc(0.15)
    for n in (1, 2, 3):
        total = sum(synthesize_exact(w, n, i).capacity() for i in range(1, (1 << n) + 1))
        assert total == pytest.approx((1 << n) * symmetric_capacity(w), abs=1e-10)


def test_resource_limits():
    with pytest.raises(ResourceLimitError):
        synthesize_exact(bsc(0.1), 4, 1)
    with pytest.raises(ResourceLimitError):
        synthesize_exact(DmcTable(np.full(5, 0.2), np.full(5, 0.2)), 1, 1)
    with pytest.raises(ValueError):
        synthesize_exact(bsc(0.1), 2, 5)


def test_transform_laws_on_random_tables(rng):
    for k in range(300):
        y = int(rng.integers(2, 5))
        w = random_bec_like(rng, y) if k % 5 == 0 else random_table(rng, y, 0.3 * (k % 2))
        minus, plus = single_step(w)
        i, im, ip = (symmetric_capacity(t) for t in (w, minus, plus))
        z, zm, zp = (bhattacharyya(t) for t in (w, minus, plus))
        assert im + ip == pytest.approx(2 * i, abs=1e-10)
        assert im <= i + 1e-12 and i <= ip + 1e-12
        assert zp == pytest.approx(z * z, abs=1e-12)
        assert z * z - 1e-12 <= zp <= z + 1e-12 <= zm + 2e-12
        if is_bec_table(w):
            assert zm == pytest.approx(2 * z - z * z, abs=1e-12)
        else:
            assert zm < 2 * z - z * z


@pytest.mark.parametrize("p", np.linspace(0.05, 0.45, 9))
def test_bsc_gap_is_visible(p):
    minus, _ = single_step(bsc(p))
    z = bhattacharyya(bsc(p))
    assert (2 * z - z * z) - bhattacharyya(minus) >= 1e-6


def test_bec_profile_dyadic_table():
    prof = bec_profile(0.5, 3)
    assert tuple(prof.z) == DYADIC_N8
    assert np.array_equal(prof.i, 1 - prof.z)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_bec_capacities_sum_exactly_at_dyadic_eps(n):
    # denominators are 2^(2^n); exact in double precision up to n = 5
    assert bec_profile(0.5, n).i.sum() == (1 << n) / 2


@pytest.mark.parametrize("n", [10, 16, 20])
def test_bec_capacities_sum_closely_at_larger_n(n):
    assert bec_profile(0.5, n).i.sum() == pytest.approx((1 << n) / 2, rel=1e-6)


def test_bec_profile_agrees_with_tables():
    for i in range(1, 9):
        assert bhattacharyya(synthesize_exact(bec(0.5), 3, i).as_table()) == pytest.approx(
            DYADIC_N8[i - 1], abs=1e-12
        )


def test_bec_profile_edges():
    assert np.all(bec_profile(0.0, 4).z == 0)
    assert np.all(bec_profile(1.0, 4).z == 1)
    with pytest.raises(ValueError):
        bec_profile(0.5, 26)


def test_path_capacity_follows_profile():
    prof = bec_profile(0.3, 4)
    for k in range(16):
        bits = [(k >> (3 - j)) & 1 for j in range(4)]
        assert bec_path_capacity(0.3, bits) == pytest.approx(prof.i[k], abs=1e-15)


@pytest.mark.parametrize("spec", ["bsc:0.11", "bec:0.3"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_symmetric_shortcut_matches_definition(spec, n):
    d = ChannelDescriptor.parse(spec)
    for i in range(1, (1 << n) + 1):
        direct = brute_force_split(d.materialize(), n, i).bhattacharyya()
        assert symmetric_z(d, n, i) == pytest.approx(direct, abs=1e-10)


def test_symmetric_shortcut_refuses_unknown_channels():
    w = DmcTable([0.6, 0.3, 0.1], [0.05, 0.25, 0.7])
    with pytest.raises(UnsupportedChannelError):
        symmetric_z(w, 2, 1)
    with pytest.raises(UnsupportedChannelError):
        symmetric_z(w, 2, 1, perm=[2, 1, 0])
