import io
import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from cyclemetrics.fungraph import MappingTable, cycle_structure, cycle_structure_0, read_mapping, write_mapping
from cyclemetrics.sampler import (
    EnumerationGuardError,
    SamplerConfig,
    count_0k_mappings,
    enumerate_0k_mappings,
    make_rng,
    sample_0k_core,
    sample_0k_cyclic_count,
    sample_0k_mapping,
    sample_0k_zero_based,
    sample_unrestricted_mapping,
)


def brute_force_0k(r, k):
    """Every map [n] -> [n] filtered by the indegree restriction (feasible for n <= 6)."""
    n = r * k
    out = []
    for img in itertools.product(range(1, n + 1), repeat=n):
        counts = Counter(img)
        if all(c == k for c in counts.values()):
            out.append(img)
    return out


# --- enumeration --------------------------------------------------------------


@pytest.mark.parametrize("r,k,count", [(2, 2, 36), (2, 3, 300), (1, 2, 2), (3, 2, 1800), (1, 3, 3)])
def test_enumeration_counts(r, k, count):
    tables = list(enumerate_0k_mappings(r, k))
    assert len(tables) == count == count_0k_mappings(r, k)
    assert len(set(tables)) == count


@pytest.mark.parametrize("r,k", [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_enumeration_matches_brute_force(r, k):
    got = sorted(tuple(t.image.tolist()) for t in enumerate_0k_mappings(r, k))
    assert got == sorted(brute_force_0k(r, k))


def test_enumeration_order_is_lexicographic_by_image_set_then_sequence():
    keys = []
    for t in enumerate_0k_mappings(2, 2):
        img = t.image.tolist()
        keys.append((tuple(sorted(set(img))), tuple(img)))
    assert keys == sorted(keys)


def test_enumeration_guard_reports_count():
    with pytest.raises(EnumerationGuardError) as err:
        enumerate_0k_mappings(5, 3)
    assert err.value.count == count_0k_mappings(5, 3)
    assert str(count_0k_mappings(5, 3)) in str(err.value)


def test_enumeration_guard_limit_is_adjustable():
    assert len(list(enumerate_0k_mappings(2, 2, limit=36))) == 36
    with pytest.raises(EnumerationGuardError):
        enumerate_0k_mappings(2, 2, limit=35)


# --- Algorithm 1 ----------------------------------------------------------------


def test_r1_k2_has_one_node_of_indegree_two():
    for seed in range(20):
        f = sample_0k_mapping(SamplerConfig(1, 2, seed=seed))
        assert sorted(np.bincount(f.zero_based, minlength=2).tolist()) == [0, 2]


def test_pinned_seed_outputs():
    assert sample_0k_mapping(SamplerConfig(2, 2, seed=2024)).image.tolist() == [2, 3, 2, 3]
    assert sample_0k_mapping(SamplerConfig(5, 3, seed=7, stream_index=3)).image.tolist() == [
        15, 14, 14, 4, 9, 14, 4, 4, 15, 15, 5, 5, 9, 5, 9,
    ]
    assert sample_0k_core(6, 2, make_rng(1)).tolist() == [0, 4, 4, 1, 3, 3]


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(0, 2)
    with pytest.raises(ValueError):
        SamplerConfig(2, 1)
    assert SamplerConfig(4, 3).n == 12
    with pytest.raises(ValueError):
        make_rng(-1)
    with pytest.raises(ValueError):
        make_rng(0, -2)


@given(st.integers(1, 30), st.integers(2, 6), st.integers(0, 2**64 - 1), st.integers(0, 1000))
def test_samples_pass_format_validation(r, k, seed, stream):
    f = sample_0k_mapping(SamplerConfig(r, k, seed, stream))
    indeg = np.bincount(f.zero_based, minlength=f.n)
    assert set(indeg.tolist()) <= {0, k}
    assert int(np.count_nonzero(indeg == k)) == r
    buf = io.StringIO()
    write_mapping(f, buf, k)
    assert read_mapping(buf.getvalue()) == f


@given(st.integers(1, 30), st.integers(2, 6), st.integers(0, 10**6))
def test_identical_config_reproduces(r, k, seed):
    cfg = SamplerConfig(r, k, seed, 5)
    assert sample_0k_mapping(cfg) == sample_0k_mapping(cfg)


def _chi_square(r, k, draws, seed):
    index = {t: i for i, t in enumerate(enumerate_0k_mappings(r, k))}
    counts = np.zeros(len(index), dtype=np.int64)
    rng = make_rng(seed)
    for _ in range(draws):
        f0 = sample_0k_zero_based(r, k, rng)
        counts[index[MappingTable.from_zero_based(f0)]] += 1
    expected = draws / len(index)
    return float(((counts - expected) ** 2 / expected).sum()), len(index) - 1


def test_uniformity_36_mappings():
    chi2, df = _chi_square(2, 2, 36_000, seed=1)
    assert df == 35
    assert chi2 < 66.62


@pytest.mark.parametrize("r,k", [(1, 2), (1, 3), (2, 3)])
def test_uniformity_small_spaces(r, k):
    count = count_0k_mappings(r, k)
    chi2, df = _chi_square(r, k, 1000 * count, seed=r * 10 + k)
    assert chi2 < stats.chi2.ppf(0.999, df)


def test_conditional_permutation_is_uniform():
    # given Z = 2 at (r=3, k=2), the two cyclic nodes are two fixed points or one swap, each with probability 1/2
    rng = make_rng(77)
    fixed = swap = 0
    for _ in range(60_000):
        c = cycle_structure_0(sample_0k_zero_based(3, 2, rng))
        if c.Z == 2:
            if c.C == 2:
                fixed += 1
            else:
                swap += 1
    total = fixed + swap
    sigma = math.sqrt(total * 0.25)
    assert abs(fixed - total / 2) < 5 * sigma


def test_unrestricted_n1():
    assert sample_unrestricted_mapping(1, seed=9).image.tolist() == [1]


def test_unrestricted_n2_frequencies():
    counts = Counter(tuple(sample_unrestricted_mapping(2, 3, i).image.tolist()) for i in range(40_000))
    assert len(counts) == 4
    sigma = math.sqrt(40_000 * 0.25 * 0.75)
    for c in counts.values():
        assert abs(c - 10_000) < 5 * sigma


def test_unrestricted_determinism():
    assert sample_unrestricted_mapping(50, 4, 2) == sample_unrestricted_mapping(50, 4, 2)
    assert sample_unrestricted_mapping(50, 4, 2) != sample_unrestricted_mapping(50, 4, 3)


# --- image-set reduction --------------------------------------------------------


def _restrict_to_image(f0, k):
    image = np.unique(f0)
    relabel = {int(y): i for i, y in enumerate(image)}
    return np.array([relabel[int(f0[y])] for y in image])


@given(st.integers(1, 40), st.integers(2, 5), st.integers(0, 10**6))
def test_restriction_to_image_keeps_cycle_structure(r, k, seed):
    f0 = sample_0k_zero_based(r, k, make_rng(seed))
    assert cycle_structure_0(_restrict_to_image(f0, k)) == cycle_structure_0(f0)


@given(st.integers(1, 60), st.integers(2, 6), st.integers(0, 10**6))
def test_core_sample_is_valid_block_map(r, k, seed):
    g = sample_0k_core(r, k, make_rng(seed))
    assert g.shape == (r,) and g.min() >= 0 and g.max() < r
    # each block collects at most k of the r injected slots
    assert np.bincount(g, minlength=r).max() <= k
    assert sample_0k_cyclic_count(r, k, make_rng(seed)) == cycle_structure_0(g).Z


def test_core_law_matches_enumeration():
    # law of the cycle-length multiset, exactly from enumeration vs core draws
    r, k = 3, 2
    exact = Counter(cycle_structure(t).cycle_lengths for t in enumerate_0k_mappings(r, k))
    total = sum(exact.values())
    keys = sorted(exact)
    rng = make_rng(5)
    draws = 60_000
    seen = Counter(cycle_structure_0(sample_0k_core(r, k, rng)).cycle_lengths for _ in range(draws))
    assert set(seen) <= set(keys)
    obs = np.array([seen[key] for key in keys], dtype=float)
    exp = np.array([exact[key] * draws / total for key in keys])
    chi2 = float(((obs - exp) ** 2 / exp).sum())
    assert chi2 < stats.chi2.ppf(0.999, len(keys) - 1)


def test_core_and_full_agree_in_distribution_at_moderate_size():
    r, k = 60, 3
    full = [cycle_structure_0(sample_0k_zero_based(r, k, make_rng(1, i))).Z for i in range(3000)]
    core = [cycle_structure_0(sample_0k_core(r, k, make_rng(2, i))).Z for i in range(3000)]
    assert stats.ks_2samp(full, core).pvalue > 0.001


def test_streams_independent_of_thread_count():
    def draw(i):
        return tuple(sample_0k_mapping(SamplerConfig(20, 2, 99, i)).image.tolist())

    serial = [draw(i) for i in range(64)]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(draw, range(64)))
    assert serial == parallel
    assert list(reversed([draw(i) for i in reversed(range(64))])) == serial
