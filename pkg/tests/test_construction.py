import itertools
import json

import numpy as np
import pytest

from polarkit.channels import ChannelDescriptor
from polarkit.construction import (
    CodeSpec,
    ConstructionError,
    ReliabilityProfile,
    construct_polar,
    construct_rm,
    monte_carlo_profile,
    rm_order,
    rm_pathology_bound,
    rm_pathology_check,
    threshold_set,
)
from polarkit.synthesis import bec_profile, brute_force_split

BEC_HALF = ChannelDescriptor.parse("bec:0.5")
BSC = ChannelDescriptor.parse("bsc:0.1")


def one_based(idx):
    return [int(i) + 1 for i in idx]


def test_polar_set_n8():
    assert one_based(construct_polar(BEC_HALF, 8, 4).info_set) == [4, 6, 7, 8]


@pytest.mark.parametrize("method,ch", [("exact-bec", BEC_HALF), ("exact-table", BSC)])
def test_full_and_empty_codes(method, ch):
    assert one_based(construct_polar(ch, 8, 8, method).info_set) == list(range(1, 9))
    code = construct_polar(ch, 8, 0, method)
    assert code.K == 0 and len(code.frozen_values) == 8


@pytest.mark.parametrize("method,ch", [("exact-bec", BEC_HALF), ("exact-table", BSC)])
def test_polar_rule_minimizes_bound_over_all_subsets(method, ch):
    code = construct_polar(ch, 8, 4, method)
    z = code.profile.z_hat
    best = min(sum(z[list(s)]) for s in itertools.combinations(range(8), 4))
    assert code.bound_sum() == pytest.approx(best, abs=1e-15)
    assert z[code.info_set].max() <= z[~code.info_mask()].min()


def test_ties_go_to_smaller_index():
    prof = ReliabilityProfile([0.5, 0.2, 0.5, 0.5], "exact-bec")
    code = construct_polar(BEC_HALF, 4, 2, profile=prof)
    assert one_based(code.info_set) == [1, 2]


def test_infeasible_combinations():
    with pytest.raises(ConstructionError):
        construct_polar(BSC, 16, 8, "exact-table")
    with pytest.raises(ConstructionError):
        construct_polar(BSC, 8, 4, "exact-bec")
    with pytest.raises(ConstructionError):
        construct_polar(BEC_HALF, 8, 9)
    with pytest.raises(ConstructionError):
        construct_polar(BEC_HALF, 8, 4, "monte-carlo")


def test_monte_carlo_bec_n8():
    prof = monte_carlo_profile(BEC_HALF, 8, 100_000, seed=11)
    exact = bec_profile(0.5, 3).z
    assert np.all(np.abs(prof.z_hat - exact) <= 3 * prof.stderr)


def test_monte_carlo_bsc_n4_against_tables():
    prof = monte_carlo_profile(BSC, 4, 50_000, seed=3)
    exact = np.array([brute_force_split(BSC.materialize(), 2, i).bhattacharyya() for i in range(1, 5)])
    assert np.all(np.abs(prof.z_hat - exact) <= 3 * prof.stderr)


def test_monte_carlo_perfect_channel_is_exactly_zero():
    prof = monte_carlo_profile(ChannelDescriptor.parse("bec:0.0"), 16, 500, seed=1)
    assert np.all(prof.z_hat == 0.0)


def test_monte_carlo_is_reproducible_and_thread_independent():
    a = monte_carlo_profile(BSC, 16, 3000, seed=99, threads=1)
    b = monte_carlo_profile(BSC, 16, 3000, seed=99, threads=4)
    c = monte_carlo_profile(BSC, 16, 3000, seed=100)
    assert a.z_hat.tobytes() == b.z_hat.tobytes()
    assert a.stderr.tobytes() == b.stderr.tobytes()
    assert a.z_hat.tobytes() != c.z_hat.tobytes()


def test_threshold_sets():
    prof = ReliabilityProfile(bec_profile(0.5, 3).z, "exact-bec")
    assert threshold_set(prof, 0.0).size == 0
    assert one_based(threshold_set(prof, 1.0)) == list(range(1, 9))
    assert one_based(threshold_set(prof, 0.2)) == [6, 7, 8]
    sizes = [threshold_set(prof, g).size for g in np.linspace(0, 1, 41)]
    assert sizes == sorted(sizes)


def test_rm_examples():
    assert one_based(construct_rm(4, 2).info_set) == [2, 4]
    assert one_based(construct_rm(8, 4).info_set) == [4, 6, 7, 8]
    assert construct_rm(8, 8).K == 8 and rm_order(3, 8) == 0
    assert construct_rm(8, 0).K == 0 and rm_order(3, 0) == 4
    assert not construct_rm(8, 5).frozen_values.any()


@pytest.mark.parametrize("n", range(1, 7))
def test_rm_sets_contain_heavy_rows(n):
    N = 1 << n
    for K in range(N + 1):
        code = construct_rm(N, K)
        r = rm_order(n, K)
        w = np.array([bin(i).count("1") for i in code.info_set])
        assert code.K == K
        assert np.all(w >= r - 1)
        assert np.sum(w >= r) == sum(1 for i in range(N) if bin(i).count("1") >= r)


def test_rm_bound_is_worse_than_polar_at_256():
    polar = construct_polar(BEC_HALF, 256, 128)
    rm = construct_rm(256, 128, BEC_HALF)
    assert not np.array_equal(polar.info_set, rm.info_set)
    assert polar.bound_sum() < rm.bound_sum()


def test_rm_pathology_examples():
    assert rm_pathology_bound(0.3, 6, 6) == pytest.approx(64 * 0.7)
    exact, bound = rm_pathology_check(0.5, 10, 5)
    assert bound == pytest.approx(7.45e-9, rel=1e-3)
    assert exact <= bound
    exact, bound = rm_pathology_check(1e-9, 8, 3)
    assert bound == pytest.approx(8, rel=1e-6) and exact <= 1.0


def test_json_round_trip_and_layout():
    code = construct_polar(BEC_HALF, 8, 4, frozen_seed=5)
    text = code.to_json()
    obj = json.loads(text)
    assert list(obj) == ["version", "N", "K", "channel", "method", "info_set",
                         "frozen_values", "z_hat", "samples", "seed"]
    assert obj["info_set"] == [4, 6, 7, 8]
    again = CodeSpec.from_json(text)
    assert again.to_json() == text
    assert np.array_equal(again.frozen_word(), code.frozen_word())


def test_json_reals_round_trip_exactly():
    prof = monte_carlo_profile(BSC, 8, 200, seed=2)
    code = construct_polar(BSC, 8, 4, profile=prof)
    back = CodeSpec.from_json(code.to_json())
    assert back.profile.z_hat.tobytes() == prof.z_hat.tobytes()
    assert back.profile.samples == 200 and back.profile.seed == 2


def test_malformed_json():
    with pytest.raises(ValueError):
        CodeSpec.from_json('{"version": 1, "N": 8}')
    with pytest.raises(ValueError):
        CodeSpec.from_json("not json")
    with pytest.raises(ValueError):
        CodeSpec(8, [0, 0], np.zeros(6), None, "x")
