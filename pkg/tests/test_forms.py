import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modtwist.arith import bernoulli, divisor_count_sieve, factorize, primes_up_to
from modtwist.exceptions import CapacityError, FormatError, UnsupportedWeightError
from modtwist.forms import (
    build_eigenform,
    cached_eigenform,
    eigenform_series,
    load_table,
    save_table,
    sym_square,
    write_csv,
)


def eta24(n):
    """q * prod (1 - q^m)^24 by schoolbook multiplication."""
    poly = [0] * (n + 1)
    poly[1] = 1
    for m in range(1, n + 1):
        for _ in range(24):
            for i in range(n, m - 1, -1):
                poly[i] -= poly[i - m]
    return poly


def e4(n):
    c = -8 / bernoulli(4)  # 240
    out = [Fraction(1)] + [c * sum(d**3 for d in range(1, m + 1) if m % d == 0) for m in range(1, n + 1)]
    return [int(v) for v in out]


def test_delta_against_eta_product():
    ref = eta24(60)
    assert list(eigenform_series(12, 61)[1:61]) == ref[1:61]
    assert list(build_eigenform(12, 5).a[1:]) == [1, -24, 252, -1472, 4830]


def test_weight_16_against_product():
    d, e = eta24(10), e4(10)
    prod = [sum(d[i] * e[n - i] for i in range(n + 1)) for n in range(11)]
    t = build_eigenform(16, 10)
    assert list(t.a[1:11]) == prod[1:11]
    assert t.a[2] == 216
    assert t.lam[2] == pytest.approx(216 / 2**7.5, rel=1e-15)


def test_normalization_and_unsupported_weight():
    assert build_eigenform(12, 1).a[1] == 1
    with pytest.raises(UnsupportedWeightError):
        build_eigenform(14, 10)
    with pytest.raises(ValueError):
        build_eigenform(12, 0)


def hecke_ok(t):
    a, k, n_max = t.a, t.k, t.N_max
    for p in primes_up_to(n_max):
        p = int(p)
        q = p
        while q * p <= n_max:
            prev = a[q // p] if q > p else 1
            if a[p] * a[q] != a[q * p] + p ** (k - 1) * prev:
                return False
            q *= p
    spf_ok = True
    for m in range(2, 200):
        for n in range(2, n_max // m + 1):
            if math.gcd(m, n) == 1 and a[m * n] != a[m] * a[n]:
                spf_ok = False
    return spf_ok


@pytest.mark.parametrize("k", [12, 16, 18, 20, 22, 26])
def test_hecke_relations_exact(k):
    assert hecke_ok(build_eigenform(k, 3000))


def test_deligne_bound():
    t = build_eigenform(12, 20000)
    d = divisor_count_sieve(20000)
    assert np.all(np.abs(t.lam[1:]) <= d[1:] * (1 + 1e-12))


def test_lambda_extension_beyond_table():
    small, big = build_eigenform(12, 200), build_eigenform(12, 4000)
    for n in (210, 221, 1024, 3969):
        assert small.lambda_at(n) == pytest.approx(big.lam[n], rel=1e-11, abs=1e-12)
    with pytest.raises(CapacityError):
        small.lambda_at(2 * 211)


def test_rankin_selberg_slope():
    t = build_eigenform(12, 2**16)
    cs = np.cumsum(t.lam**2)
    Ns = 2 ** np.arange(8, 17)
    slope = np.polyfit(np.log(Ns), np.log(cs[Ns]), 1)[0]
    assert abs(slope - 1.0) <= 0.05


def test_sym_square_examples():
    t = build_eigenform(12, 400)
    s = sym_square(t)
    assert s.A(1, 1) == 1
    assert s.A(1, 2) == pytest.approx(t.lam[4], abs=1e-14)
    assert s.A(1, 4) == pytest.approx(t.lam[16] + 1, abs=1e-13)
    for p in primes_up_to(20):
        p = int(p)
        assert s.A1[p] == pytest.approx(t.lam[p] ** 2 - 1, abs=1e-12)


def test_sym_square_row_and_divisor_bound():
    t = build_eigenform(12, 600)
    s = sym_square(t)
    d = divisor_count_sieve(600)
    for n in (1, 2, 6, 12, 30):
        row = s.A_row(n, 40)
        for m in range(1, 41):
            assert row[m] == pytest.approx(s.A(m, n), abs=1e-12)
            assert abs(row[m]) <= d[m] ** 2 * d[n] ** 2
    with pytest.raises(CapacityError):
        s.A(601, 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60))
def test_sym_square_symmetric(m, n):
    s = sym_square(build_eigenform(12, 64))
    assert s.A(m, n) == pytest.approx(s.A(n, m), abs=1e-12)


def test_cache_roundtrip(tmp_path):
    t = build_eigenform(12, 1000)
    p = tmp_path / "t.vfrg"
    save_table(t, p)
    back = load_table(p)
    assert back.a == t.a
    assert np.array_equal(back.lam, t.lam)
    short = load_table(p, k=12, N_max=100)
    assert short.a == t.a[:101]


def test_cache_roundtrip_large_coefficients(tmp_path):
    t = build_eigenform(26, 300)
    save_table(t, tmp_path / "x")
    assert load_table(tmp_path / "x").a == t.a


def test_cache_errors(tmp_path):
    t = build_eigenform(12, 50)
    p = tmp_path / "t.vfrg"
    save_table(t, p)
    raw = p.read_bytes()
    (tmp_path / "bad").write_bytes(b"XXXXX" + raw[5:])
    with pytest.raises(FormatError):
        load_table(tmp_path / "bad")
    (tmp_path / "trunc").write_bytes(raw[:-20])
    with pytest.raises(FormatError):
        load_table(tmp_path / "trunc")
    with pytest.raises(CapacityError):
        load_table(p, N_max=51)
    with pytest.raises(FormatError):
        load_table(p, k=16)


def test_cached_eigenform_hit_equals_cold(tmp_path):
    cold = cached_eigenform(12, 300, tmp_path)
    hit = cached_eigenform(12, 200, tmp_path)
    assert hit.a == cold.a[:201]
    assert np.array_equal(hit.lam, cold.lam[:201])
    assert any(tmp_path.iterdir())


def test_write_csv(tmp_path):
    p = tmp_path / "c.csv"
    write_csv(build_eigenform(12, 5), p)
    lines = p.read_text().splitlines()
    assert lines[0] == "n,a(n),lambda(n)"
    assert lines[-1].startswith("5,4830,")
