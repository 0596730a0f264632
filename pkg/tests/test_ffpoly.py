import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyclemetrics.ffpoly import (
    PolySpec,
    indegree_law,
    is_prime,
    poly_mapping,
    power_table,
    primes_congruent,
    verify_indegree_law,
)
from cyclemetrics.fungraph import indegree_profile


def trial_division_prime(n):
    return n >= 2 and all(n % q for q in range(2, math.isqrt(n) + 1))


SMALL_PRIMES = [p for p in range(3, 500) if trial_division_prime(p)]


def test_x2_plus_1_mod_5():
    f = poly_mapping(PolySpec(5, 2, 1))
    assert (f.image - 1).tolist() == [1, 2, 0, 0, 2]
    assert dict(indegree_profile(f).counts) == {0: 2, 1: 1, 2: 2}


def test_squares_mod_3():
    assert (poly_mapping(PolySpec(3, 2, 0)).image - 1).tolist() == [0, 1, 1]


def test_x3_plus_1_mod_7():
    spec = PolySpec(7, 3, 1)
    assert dict(indegree_profile(poly_mapping(spec)).counts) == {0: 4, 1: 1, 3: 2}
    assert verify_indegree_law(spec)


def test_verify_examples():
    assert verify_indegree_law(PolySpec(5, 2, 1))
    spec = PolySpec(13, 4, 3)
    assert spec.k == 4 and verify_indegree_law(spec)
    assert PolySpec(7, 5, 1).k == 1
    with pytest.raises(ValueError):
        verify_indegree_law(PolySpec(7, 5, 1))


@pytest.mark.parametrize("p,d,a", [(4, 2, 0), (9, 2, 0), (7, 1, 0), (7, 2, 7), (7, 2, -1), (2, 2, 0)])
def test_spec_validation(p, d, a):
    with pytest.raises(ValueError):
        PolySpec(p, d, a)


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_indegree_law_grid(p):
    for d in range(2, 7):
        if math.gcd(p - 1, d) < 2:
            continue
        for a in {0, 1, p // 2, p - 1}:
            assert verify_indegree_law(PolySpec(p, d, a))


@given(st.sampled_from(SMALL_PRIMES), st.integers(2, 12), st.data())
def test_coalescence_matches_law(p, d, data):
    a = data.draw(st.integers(0, p - 1))
    spec = PolySpec(p, d, a)
    prof = indegree_profile(poly_mapping(spec))
    law = indegree_law(p, spec.k) if spec.k >= 2 else {1: p}
    expected = Fraction(sum(j * j * c for j, c in law.items()), p) - 1
    assert prof.coalescence == expected


@given(st.sampled_from(SMALL_PRIMES + [10007, 65537]), st.integers(2, 10**6))
def test_power_table_matches_pow(p, d):
    table = power_table(p, d)
    assert table.tolist() == [pow(x, d, p) for x in range(p)]


def test_primes_congruent_examples():
    assert primes_congruent(1000, 1, 1) == [1009]
    assert primes_congruent(1000, 4, 1) == [1009]
    assert primes_congruent(1000, 5, 1) == [1021]


@given(st.integers(2, 5000), st.integers(1, 12), st.integers(1, 8))
def test_primes_congruent_property(start, k, count):
    ps = primes_congruent(start, k, count)
    assert len(ps) == count and ps == sorted(ps)
    assert all(p > start and p % k == 1 % k and trial_division_prime(p) for p in ps)
    first = ps[0]
    assert not any(trial_division_prime(q) and q % k == 1 % k for q in range(start + 1, first))


def test_primes_with_other_residue():
    assert all(p % 4 == 3 for p in primes_congruent(1000, 4, 5, residue=3))
    with pytest.raises(ValueError):
        primes_congruent(1000, 4, 1, residue=2)


def test_is_prime_against_trial_division():
    for n in range(-3, 20000):
        assert is_prime(n) == trial_division_prime(n)


@pytest.mark.parametrize(
    "n,expected",
    [
        (2**61 - 1, True),
        (2**64 - 59, True),
        (3215031751, False),  # strong pseudoprime to bases 2, 3, 5, 7
        (3825123056546413051, False),  # strong pseudoprime to bases 2..23
        (2**64 - 1, False),
    ],
)
def test_is_prime_64_bit(n, expected):
    assert is_prime(n) == expected
