import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modtwist.arith import (
    bernoulli,
    dirichlet_approx,
    divisor_count,
    divisor_count_sieve,
    euler_phi,
    factorize,
    kloosterman,
    kloosterman_table,
    mod_inverse,
    moebius,
    primes_up_to,
)
from modtwist.exceptions import CapacityError, NoInverseError


def brute_kloosterman(a, b, c):
    tot = 0j
    for x in range(c):
        if math.gcd(x, c) == 1:
            xb = pow(x, -1, c) if c > 1 else 0
            tot += cmath.exp(2j * math.pi * ((a * x + b * xb) % c) / c)
    return tot


def test_small_functions():
    assert divisor_count(12) == 6
    assert moebius(30) == -1
    assert moebius(12) == 0
    assert moebius(1) == 1
    assert mod_inverse(3, 5) == 2
    assert euler_phi(36) == 12
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert list(primes_up_to(20)) == [2, 3, 5, 7, 11, 13, 17, 19]


def test_mod_inverse_errors():
    with pytest.raises(NoInverseError):
        mod_inverse(4, 6)
    with pytest.raises(ValueError):
        mod_inverse(1, 0)


def test_divisor_sieve_matches_factorization():
    d = divisor_count_sieve(2000)
    assert all(d[n] == divisor_count(n) for n in range(1, 2001))


def test_bernoulli_numbers():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(12) == Fraction(-691, 2730)


@pytest.mark.parametrize("a,b,c,expected", [(1, 1, 2, 1.0), (1, 1, 3, -1.0)])
def test_kloosterman_examples(a, b, c, expected):
    assert kloosterman(a, b, c).value == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("c", [1, 7, 12, 30, 97])
def test_kloosterman_zero_is_totient(c):
    assert kloosterman(0, 0, c).value == pytest.approx(euler_phi(c), abs=1e-9)


def test_kloosterman_against_brute_force():
    rng = random.Random(1)
    for _ in range(60):
        c = rng.randint(1, 300)
        a, b = rng.randint(-50, 500), rng.randint(-50, 500)
        ref = brute_kloosterman(a, b, c)
        val = kloosterman(a, b, c)
        assert abs(val.value - ref.real) < 1e-9
        assert abs(ref.imag) < 1e-8


def test_kloosterman_table_matches_scalar():
    vals = kloosterman_table(3, 35, range(40))
    assert np.allclose(vals, [kloosterman(3, b, 35).value for b in range(40)], atol=1e-10)


def test_kloosterman_capacity():
    with pytest.raises(CapacityError):
        kloosterman(1, 1, 10**8 + 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(1, 400))
def test_kloosterman_symmetry_and_weil(a, b, c):
    s = kloosterman(a, b, c)
    assert abs(s.value - kloosterman(b, a, c).value) < 1e-9
    assert abs(s.value) <= s.weil_bound() * (1 + 1e-12) + 1e-9
    assert s.imag_residual <= 1e-10 * divisor_count(c) * math.sqrt(c)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60), st.integers(0, 500), st.integers(0, 500))
def test_kloosterman_twisted_multiplicativity(c1, c2, a, b):
    if math.gcd(c1, c2) != 1:
        return
    i1 = pow(c1, -1, c2) if c2 > 1 else 0
    i2 = pow(c2, -1, c1) if c1 > 1 else 0
    lhs = kloosterman(a, b, c1 * c2).value
    rhs = kloosterman(a * i2, b * i2, c1).value * kloosterman(a * i1, b * i1, c2).value
    assert abs(lhs - rhs) < 1e-8


def test_dirichlet_examples():
    r = dirichlet_approx(math.pi, 10)
    assert (r.a, r.q) == (22, 7)
    assert abs(r.theta / (2 * math.pi)) == pytest.approx(1.26e-3, rel=0.01)
    assert abs(r.theta / (2 * math.pi)) <= 1 / 70
    r = dirichlet_approx(0.0, 17)
    assert (r.a, r.q, r.theta) == (0, 1, 0.0)
    r = dirichlet_approx(3 / 8, 8)
    assert (r.a, r.q, r.theta) == (3, 8, 0.0)


def test_dirichlet_rejects_bad_input():
    with pytest.raises(ValueError):
        dirichlet_approx(0.3, 0.5)
    with pytest.raises(ValueError):
        dirichlet_approx(float("nan"), 5)


def test_dirichlet_random_10k():
    rng = np.random.default_rng(7)
    for alpha, Q in zip(rng.uniform(-5, 5, 10_000), rng.uniform(1, 1e5, 10_000)):
        r = dirichlet_approx(float(alpha), float(Q))
        assert 1 <= r.q <= Q
        assert math.gcd(r.a, r.q) == 1
        err = abs(Fraction(float(alpha)) - Fraction(r.a, r.q))
        assert err <= Fraction(1) / (r.q * Fraction(float(Q)))
        assert abs(r.a / r.q + r.theta / (2 * math.pi) - alpha) <= 4 * math.ulp(max(abs(alpha), 1.0))


def test_weil_bound_all_moduli():
    """Weil bound for every c <= 10^4 with one random (a, b) each."""
    rng = np.random.default_rng(3)
    for c in range(1, 10_001):
        a, b = (int(v) for v in rng.integers(0, 10**6, 2))
        s = kloosterman(a, b, c)
        assert abs(s.value) <= s.weil_bound() * (1 + 1e-12) + 1e-9
