"""scikit-learn style wrappers around the transform, the envelopes and the exponent fits."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .special import BumpWeight
from .sums import fit_slope
from .voronoi import FAMILIES, EnvelopeConstants, TransformSpec, VoronoiTransform, bound_envelope


def _column(X, name: str = "X") -> np.ndarray:
    """Accept a 1-d array or an ``(n, 1)`` matrix of positive finite reals."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    X = check_array(X, ensure_2d=True, dtype=float)
    if X.shape[1] != 1:
        raise ValueError(f"{name} must have a single column, got shape {X.shape}")
    x = X[:, 0]
    if np.any(x <= 0):
        raise ValueError(f"{name} must be positive")
    return x


class VoronoiTransformer(TransformerMixin, BaseEstimator):
    """Evaluates the Voronoi transform at the points in ``X``.

    ``fit`` builds the Mellin integrand once; ``transform`` returns the
    columns ``(re, im, err)`` and ``predict`` the complex values.
    """

    def __init__(self, family: str = "holo", k: float = 12, N: float = 1000.0, theta: float = 0.0,
                 eta: int = 0, sigma: float = -0.5, dt: float = 0.05):
        self.family = family
        self.k = k
        self.N = N
        self.theta = theta
        self.eta = eta
        self.sigma = sigma
        self.dt = dt

    def fit(self, X=None, y=None):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        spec = TransformSpec(self.family, self.k, BumpWeight(float(self.N)), theta=self.theta, eta=self.eta,
                             sigma=self.sigma, dt=self.dt)
        self.transform_ = VoronoiTransform(spec)
        return self

    def transform(self, X):
        check_is_fitted(self, "transform_")
        res = self.transform_.evaluate(_column(X))
        v = np.asarray(res.value, dtype=complex).reshape(-1)
        err = np.broadcast_to(np.asarray(res.err, dtype=float), v.shape)
        return np.column_stack([v.real, v.imag, err])

    def predict(self, X) -> np.ndarray:
        out = self.transform(X)
        return out[:, 0] + 1j * out[:, 1]


class EnvelopeEstimator(RegressorMixin, BaseEstimator):
    """Fits the smallest ``C`` with ``|Psi| <= C (M + E)`` on the training points.

    ``X`` has columns ``(spectral, tn, x)``; ``y`` holds measured ``|Psi|``.
    """

    def __init__(self, family: str = "holo", N: float = 1000.0, eps: float = 0.05, A: float = 10.0,
                 c1: float = 1.0, c2: float = 1.0, c3: float = 1.0):
        self.family = family
        self.N = N
        self.eps = eps
        self.A = A
        self.c1 = c1
        self.c2 = c2
        self.c3 = c3

    def _envelope(self, X) -> np.ndarray:
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError("X needs columns (spectral, tn, x)")
        const = EnvelopeConstants(self.eps, self.A, self.c1, self.c2, self.c3)
        return np.array([bound_envelope(self.family, s, t, x, self.N, constants=const).total for s, t, x in X])

    def fit(self, X, y):
        y = np.abs(np.asarray(y)).astype(float)
        env = self._envelope(X)
        if y.shape != env.shape:
            raise ValueError("X and y lengths differ")
        self.ratios_ = y / env
        self.C_ = float(self.ratios_.max())
        self.n_features_in_ = 3
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "C_")
        return self.C_ * self._envelope(X)


class ExponentFitter(RegressorMixin, BaseEstimator):
    """Least-squares power law ``y ~ exp(intercept) X^slope`` in log-log coordinates."""

    def __init__(self, tolerance: float | None = None):
        self.tolerance = tolerance

    def fit(self, X, y):
        x = _column(X)
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape != x.shape or np.any(y <= 0):
            raise ValueError("y must be positive and match X")
        if x.size < 2:
            raise ValueError("need at least two points")
        self.slope_ = fit_slope(x, y)
        self.intercept_ = float(np.mean(np.log(y) - self.slope_ * np.log(x)))
        return self

    @property
    def passed_(self) -> bool:
        check_is_fitted(self, "slope_")
        return self.tolerance is None or self.slope_ <= self.tolerance

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "slope_")
        return np.exp(self.intercept_ + self.slope_ * np.log(_column(X)))

    def score(self, X, y, sample_weight=None) -> float:
        """R^2 in log space."""
        ly = np.log(np.asarray(y, float))
        lp = np.log(self.predict(X))
        return float(1 - np.sum((ly - lp) ** 2) / np.sum((ly - ly.mean()) ** 2))
