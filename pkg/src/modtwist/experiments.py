"""Reusable numerical studies shared by the command line and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.signal import argrelmax

from .oscillatory import PhaseModel, cubic_airy_predict, osc_integrate
from .special import (
    GammaRatio,
    BumpWeight,
    airy,
    airy_leading_neg,
    airy_leading_pos,
    mellin_psi,
    stationary_phase_mellin,
    stirling_ratio,
)
from .sums import vdc_check_prop1, vdc_check_prop2

AI0_REFERENCE = 0.3550280539
AIRY_SUP_CEILING = 0.536


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "passed": self.passed, "detail": self.detail}


# ---------------------------------------------------------------------------
# Airy


def airy_series_mp(x: float, dps: int = 60) -> tuple[float, float]:
    """``(Ai(x), Bi(x))`` from the Maclaurin series summed in ``dps``-digit arithmetic."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        c1 = 1 / (mpmath.cbrt(9) * mpmath.gamma(mpmath.mpf(2) / 3))
        c2 = 1 / (mpmath.cbrt(3) * mpmath.gamma(mpmath.mpf(1) / 3))
        x3 = x**3
        f = tf = mpmath.mpf(1)
        g = tg = x
        k = 0
        eps = mpmath.mpf(10) ** (-dps)
        while True:
            tf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
            tg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
            f += tf
            g += tg
            k += 1
            if abs(tf) + abs(tg) < eps * (abs(f) + abs(g)) and k > 5:
                break
        return float(c1 * f - c2 * g), float(mpmath.sqrt(3) * (c1 * f + c2 * g))


def airy_checks(at: float = 10.0, branch_tol: float = 1e-2) -> list[Check]:
    """Value at 0, both leading branches at ``|x| = at`` and the global bound."""
    ai0 = float(airy(0.0))
    checks = [Check("Ai(0)", abs(ai0 - AI0_REFERENCE), 1e-10, abs(ai0 - AI0_REFERENCE) <= 1e-10, f"Ai(0) = {ai0!r}")]

    ai_pos, _ = airy_series_mp(at)
    e_pos = abs(float(airy_leading_pos(at)) - ai_pos) / abs(ai_pos)
    checks.append(Check(f"positive branch at x={at:g}", e_pos, branch_tol, e_pos <= branch_tol))

    ai_neg, bi_neg = airy_series_mp(-at)
    env_series = math.hypot(ai_neg, bi_neg)
    env_leading = 1 / (math.sqrt(math.pi) * at**0.25)
    e_env = abs(env_leading - env_series) / env_series
    pointwise = abs(float(airy_leading_neg(-at)) - ai_neg) / abs(ai_neg)
    checks.append(
        Check(
            f"negative branch envelope at x={-at:g}", e_env, branch_tol, e_env <= branch_tol,
            f"pointwise relative error {pointwise:.3g} (Ai({-at:g}) = {ai_neg:.6g} sits near a zero)",
        )
    )

    xs = np.linspace(-50.0, 20.0, 140001)
    sup = float(np.max(np.abs(airy(xs))))
    checks.append(Check("sup |Ai|", sup, AIRY_SUP_CEILING, sup <= AIRY_SUP_CEILING))
    return checks


# ---------------------------------------------------------------------------
# Stirling and stationary phase


def stirling_validation(values=None, sigma: float = -0.5, deltas=(0.0, 1.0), M: int = 3) -> Check:
    """Worst ``err * max(C, |tau|)^M / 10`` over ``C, |tau|`` in ``values``; passes if ``<= 1``."""
    values = np.geomspace(10, 1000, 13) if values is None else np.asarray(values, float)
    worst = 0.0
    for delta in deltas:
        for C in values:
            gr = GammaRatio(C=float(C), delta=delta, sigma=sigma, M=M)
            for sgn in (1, -1):
                tau = sgn * values
                ex = gr.exact(tau)
                err = np.abs(stirling_ratio(gr, tau) - ex) / np.abs(ex)
                worst = max(worst, float(np.max(err * np.maximum(C, np.abs(tau)) ** M / 10)))
    return Check("Stirling 3-term", worst, 1.0, worst <= 1.0, "normalized by 10 max(C,|tau|)^-3")


def stationary_phase_slope(taus=None, N: float = 1000.0, sigma: float = 0.0, centre: float = 1.5):
    """Error of the leading stationary-phase term against direct quadrature.

    ``theta = -tau / (centre N)`` puts the stationary point at ``centre * N``.
    Returns ``(taus, errors, slope)``.
    """
    taus = np.geomspace(10, 1000, 9) if taus is None else np.asarray(taus, float)
    w = BumpWeight(N)
    errs = []
    for tau in taus:
        theta = -tau / (centre * N)
        exact = mellin_psi(w, theta, complex(-sigma, tau))
        errs.append(abs(exact - stationary_phase_mellin(w, theta, sigma, tau)))
    errs = np.array(errs)
    slope = float(np.polyfit(np.log(taus), np.log(errs), 1)[0])
    return taus, errs, slope


# ---------------------------------------------------------------------------
# degenerate stationary point


def _bump(lo: float, hi: float):
    c, r = (hi + lo) / 2, (hi - lo) / 2

    def g(t):
        u = (np.asarray(t, float) - c) / r
        with np.errstate(all="ignore"):
            v = np.exp(1 - 1 / (1 - u * u))
        return np.where(np.abs(u) < 1, v, 0.0)

    return g


def _smooth_step(u):
    u = np.asarray(u, float)
    with np.errstate(all="ignore"):
        f = lambda s: np.where(s > 0, np.exp(-1 / np.where(s > 0, s, 1)), 0.0)  # noqa: E731
        return f(u) / (f(u) + f(1 - u))


def _plateau(lo: float, p1: float, p2: float, hi: float):
    def g(t):
        t = np.asarray(t, float)
        return _smooth_step((t - lo) / (p1 - lo)) * _smooth_step((hi - t) / (hi - p2))

    return g


@dataclass
class PredictorStudy:
    k: float
    transition_a: np.ndarray
    transition_err: np.ndarray
    far_delta: np.ndarray
    far_peaks: np.ndarray
    far_slope: float

    @property
    def transition_max(self) -> float:
        return float(np.max(self.transition_err))


def predictor_study(k: float = 200.0, N: float = 1000.0, eps: float = 0.05, n_transition: int = 21,
                    n_far: int = 600) -> PredictorStudy:
    """Cubic-Airy predictor across the transition and the far-regime decay.

    Transition: ``tn = k``, ``x = x0 e^a`` with ``|a| = |h'(k/2)| <= k^(-2/3+eps)``
    and ``g`` a bump on ``(1, k-1)``; error relative to :func:`osc_integrate`.
    Far regime: ``k^(4/3+eps) < Delta <= k^(2+eps)`` with ``g`` a plateau
    times the ``tau^(-1/2)`` stationary-phase amplitude of the Mellin factor;
    the slope is fitted to the local maxima of ``|J|`` in ``Delta``.
    """
    tn = k
    theta = tn / N
    x0 = tn * k / ((2 * math.pi) ** 2 * N)
    amax = k ** (-2 / 3 + eps)
    a_tr = np.linspace(-amax, amax, n_transition)
    g = _bump(1.0, k - 1.0)
    errs = []
    for a in a_tr:
        pm = PhaseModel("holo", k, x0 * math.exp(a), theta, N)
        o = osc_integrate(g, pm, (1.0, k - 1.0)).value
        errs.append(abs(o - cubic_airy_predict(pm, g, eps)) / abs(o))

    d_lo, d_hi = k ** (4 / 3 + eps), k ** (2 + eps)
    a_far = np.log1p(np.geomspace(d_lo, d_hi, n_far) / (N * x0))
    # outer stationary point ~ k e^a must stay inside the support
    t_out = k * math.exp(a_far[-1])
    lo, hi = 0.02 * k, 1.5 * t_out
    plateau = _plateau(lo, 0.1 * k, 1.2 * t_out, hi)

    def gp(t):
        return plateau(t) * (np.asarray(t, float) / (k / 2)) ** -0.5

    J = np.array([abs(osc_integrate(gp, PhaseModel("holo", k, x0 * math.exp(a), theta, N), (lo, hi)).value)
                  for a in a_far])
    D = N * x0 * np.expm1(a_far)
    peaks = argrelmax(J)[0]
    slope = float(np.polyfit(np.log(D[peaks]), np.log(J[peaks]), 1)[0]) if peaks.size > 1 else float("nan")
    return PredictorStudy(k, a_tr, np.array(errs), D[peaks], J[peaks], slope)


# ---------------------------------------------------------------------------
# van der Corput trials


def vdc_trials(trials: int = 100, seed: int = 0, first_constant: float = 1.0,
               second_constant: float = 3.0) -> dict:
    """Random admissible phases for both tests; returns measured/bound ratios and violations."""
    rng = np.random.default_rng(seed)
    r1, r2 = [], []
    v1 = v2 = 0
    for _ in range(trials):
        nu = rng.uniform(0.02, 0.4)
        L = rng.uniform(50, 2000)
        lo, hi = rng.uniform(nu, 0.5), rng.uniform(0.5, 1 - nu)
        res = vdc_check_prop1(lambda t: lo * t + (hi - lo) * t * t / (2 * L), (0.0, L), nu,
                              dh=lambda t: lo + (hi - lo) * t / L, constant=first_constant)
        r1.append(res.measured / res.bound)
        v1 += not res.holds

        M = rng.uniform(10, 1e4)
        b = rng.uniform(0, 1)
        L = rng.uniform(10, 5000)
        eta = rng.uniform(1, 3)
        c3 = (eta - 1) / (3 * M * L)  # h'' = 1/M + 3 c3 t runs over [1/M, eta/M]
        res = vdc_check_prop2(lambda t: t * t / (2 * M) + b * t + c3 * t**3 / 2, (0.0, L), 1 / M, eta * (1 + 1e-9),
                              d2h=lambda t: 1 / M + 3 * c3 * t, constant=second_constant)
        r2.append(res.measured / res.bound)
        v2 += not res.holds
    return {"prop1_max_ratio": max(r1), "prop1_violations": v1,
            "prop2_max_ratio": max(r2), "prop2_violations": v2, "trials": trials, "seed": seed}
