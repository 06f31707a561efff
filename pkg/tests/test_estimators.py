import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from modtwist.estimators import EnvelopeEstimator, ExponentFitter, VoronoiTransformer
from modtwist.special import BumpWeight
from modtwist.voronoi import bessel_kernel_check, bound_envelope


def test_transformer_matches_bessel():
    x = np.array([0.04, 0.2, 0.6])
    est = VoronoiTransformer(family="holo", k=12, N=1000.0).fit()
    out = est.transform(x.reshape(-1, 1))
    assert out.shape == (3, 3)
    ref = bessel_kernel_check(12, BumpWeight(1000.0), x)
    assert np.allclose(est.predict(x), ref, rtol=1e-8)
    assert np.all(out[:, 2] >= 0)


def test_transformer_params_and_validation():
    est = VoronoiTransformer(k=16, theta=0.01)
    assert est.get_params()["k"] == 16
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.transform([[0.1]])
    est.fit()
    with pytest.raises(ValueError):
        est.transform([[-0.1]])
    with pytest.raises(ValueError):
        est.transform(np.ones((2, 2)))
    with pytest.raises(ValueError):
        VoronoiTransformer(family="gl5").fit()


def test_envelope_estimator():
    X = np.array([[12, 0, 0.01], [30, 30, 0.1], [50, 100, 0.02]], dtype=float)
    env = np.array([bound_envelope("holo", *row, 1000.0).total for row in X])
    y = env * np.array([0.1, 0.5, 0.2])
    est = EnvelopeEstimator(family="holo").fit(X, y)
    assert est.C_ == pytest.approx(0.5)
    assert np.allclose(est.predict(X), 0.5 * env)
    with pytest.raises(ValueError):
        est.fit(X[:, :2], y)


def test_exponent_fitter():
    N = 2.0 ** np.arange(10, 17)
    y = 3.0 * N**0.5
    f = ExponentFitter(tolerance=0.6).fit(N, y)
    assert f.slope_ == pytest.approx(0.5)
    assert f.passed_
    assert np.allclose(f.predict(N), y)
    assert f.score(N, y) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ExponentFitter().fit(N, -y)
