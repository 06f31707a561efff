import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modtwist.exceptions import AdmissibilityError
from modtwist.forms import build_eigenform, sym_square
from modtwist.special import BumpWeight
from modtwist.voronoi import (
    EnvelopeConstants,
    GridPoint,
    TransformSpec,
    VoronoiTransform,
    bessel_kernel_check,
    bound_envelope,
    envelope_validation,
    standard_grid,
    voronoi_identity_residual,
)

W = BumpWeight(1000.0)


@pytest.fixture(scope="module")
def holo12():
    return VoronoiTransform(TransformSpec("holo", 12, W))


@pytest.fixture(scope="module")
def delta_table():
    return build_eigenform(12, 4000)


def test_transform_matches_bessel_on_fixture_points(holo12):
    x = np.arange(1, 21) / 25
    a = holo12.evaluate(x).value
    b = bessel_kernel_check(12, W, x)
    assert np.max(np.abs(a - b) / np.abs(b)) <= 1e-8


def test_transform_matches_bessel_wherever_both_resolved(holo12):
    x = np.geomspace(1e-3, 100, 30)
    a = holo12.evaluate(x).value
    b = bessel_kernel_check(12, W, x)
    both = (np.abs(a) > 1e-12) & (np.abs(b) > 1e-12)
    assert np.max(np.abs(a[both] - b[both]) / np.abs(b[both])) <= 1e-8


def test_scalar_and_vector_evaluation_agree(holo12):
    x = np.linspace(0.01, 2, 100)  # takes the interpolated path
    many = holo12.evaluate(x).value
    few = np.array([holo12(v) for v in x[::11]])
    assert np.max(np.abs(many[::11] - few)) < 1e-11


def test_contour_shift_independence(holo12):
    other = VoronoiTransform(TransformSpec("holo", 12, W, sigma=0.0))
    x = np.geomspace(1e-3, 1, 12)
    a, b = holo12.evaluate(x), other.evaluate(x)
    assert np.all(np.abs(a.value - b.value) <= a.err + b.err)


def test_decay_regime_example(holo12):
    U = 144.0
    x = 4 * U * (1000 * 12) ** 0.05 / 1000
    assert abs(holo12(x)) <= 1e-6 * math.sqrt(U)
    assert abs(bessel_kernel_check(12, W, x)) <= 1e-6 * math.sqrt(U)


def test_bessel_linearity():
    x = np.array([0.05, 0.4])
    assert np.allclose(bessel_kernel_check(12, W, x, scale=2.0), 2 * bessel_kernel_check(12, W, x), rtol=1e-14)


def test_sigma_admissibility():
    with pytest.raises(AdmissibilityError):
        TransformSpec("holo", 12, W, sigma=-7.0)
    with pytest.raises(AdmissibilityError):
        TransformSpec("maass", 12, W, sigma=-1.0)
    with pytest.raises(ValueError):
        TransformSpec("gl4", 12, W)


def test_gl3_plus_minus_sum():
    e = VoronoiTransform(TransformSpec("symsq", 12, BumpWeight(500.0)))
    x = np.array([0.01, 0.1, 0.5])
    p, m = e.gl3_pm(x)
    assert np.allclose(p + m, e(x, 0) / math.pi**1.5, rtol=1e-13, atol=1e-16)
    # exchanging eta swaps which combination picks up +i
    assert np.allclose(p - m, -1j * e(x, 1) / math.pi**1.5, rtol=1e-13, atol=1e-16)


def test_maass_parity_relations():
    e = VoronoiTransform(TransformSpec("maass", 20, W, theta=0.01))
    par = e.maass_parity(np.array([0.02, 0.3]))
    assert np.array_equal(par["+e"], par["-o"])
    assert np.array_equal(par["-e"], par["+o"])
    with pytest.raises(ValueError):
        VoronoiTransform(TransformSpec("holo", 12, W)).maass_parity(0.1)


def test_holo_identity_fixture(delta_table):
    res = voronoi_identity_residual("holo", delta_table, 3, 5, W)
    assert res.residual <= 1e-6
    assert res.orientation["sign_flipped"] > 1e-3  # wrong orientation is detected
    assert res.orientation["swapped"] > 1e-3 or res.orientation["swapped"] <= 1e-6
    resid = [r for _, r in res.history]
    assert all(b <= a * 1.5 for a, b in zip(resid, resid[1:]))


def test_holo_identity_trivial_modulus(delta_table):
    res = voronoi_identity_residual("holo", delta_table, 1, 1, W)
    assert res.residual <= 1e-6


def test_holo_identity_with_twist(delta_table):
    res = voronoi_identity_residual("holo", delta_table, 2, 7, W, theta=0.003)
    assert res.residual <= 1e-6


def test_symsq_identity_fixture():
    table = sym_square(build_eigenform(12, 40000))
    res = voronoi_identity_residual("symsq", table, 1, 3, BumpWeight(500.0))
    assert res.residual <= 1e-4


def test_identity_rejects_bad_input(delta_table):
    with pytest.raises(ValueError):
        voronoi_identity_residual("holo", delta_table, 5, 10, W)
    with pytest.raises(ValueError):
        voronoi_identity_residual("maass", delta_table, 1, 3, W)
    with pytest.raises(TypeError):
        voronoi_identity_residual("symsq", delta_table, 1, 3, W)


def test_envelope_examples():
    env = bound_envelope("holo", 50, 5.0, 0.1, 1000)
    assert env.E == 0 and env.regime.startswith("E-zero")
    assert bound_envelope("maass", 50, 50, 0.1, 1000).E == 0
    k, eps = 100.0, 0.05
    Delta = k ** (5 / 3)
    x = (Delta + k * k / (2 * math.pi) ** 2) / 1000
    env = bound_envelope("holo", k, k, x, 1000)
    assert env.Delta == pytest.approx(Delta, rel=1e-9)
    assert env.E == pytest.approx(k ** (1.5 + eps) / Delta**0.25, rel=1e-9)
    x0 = k * k / (2 * math.pi) ** 2 / 1000
    assert bound_envelope("holo", k, k, x0, 1000).regime.startswith("E-case-1")


def test_envelope_constants_are_configurable():
    k = 100.0
    x = (k ** (1.45) + k * k / (2 * math.pi) ** 2) / 1000
    loose = bound_envelope("holo", k, k, x, 1000, constants=EnvelopeConstants(c1=10.0))
    tight = bound_envelope("holo", k, k, x, 1000)
    assert loose.regime.startswith("E-case-1") and tight.regime.startswith("E-case-2")


def test_envelope_validation_small_grid():
    grid = [p for p in standard_grid("maass", ks=(50,)) + standard_grid("maass", ks=(20, 100))]
    rep = envelope_validation("maass", grid)
    assert np.isfinite(rep.C) and rep.C <= 100
    assert rep.slope <= 0.1
    holo = envelope_validation("holo", standard_grid("holo", ks=(12, 30, 75)))
    assert holo.misclassified == 0 and holo.passed
    csv_text = holo.to_csv()
    assert csv_text.splitlines()[0].startswith("family,k_or_T,theta,N,x")
    assert len(csv_text.splitlines()) == len(holo.rows) + 1


def test_decay_points_margin():
    grid = standard_grid("holo", ks=(12, 30, 75), r_values=(1e-2, 0.1, 0.5, 2.0, 4.0))
    rep = envelope_validation("holo", grid)
    decay = [r["ratio"] for r in rep.rows if r["decay"]]
    assert decay and rep.C >= 10 * max(decay)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_bessel_route_linear_in_scale(x, s):
    base = bessel_kernel_check(12, W, x)
    assert abs(bessel_kernel_check(12, W, x, scale=s) - s * base) <= 1e-14 * s * (1 + abs(base))
