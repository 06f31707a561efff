"""Oscillatory integrals ``int g(tau) e^{i h(tau)} d tau``: quadrature, derivative tests, phase models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import spherical_jn

from .exceptions import ConvergenceError, PremiseError, RegimeError
from .special import airy

FAMILIES = ("holo", "maass", "symsq")


# ---------------------------------------------------------------------------
# phases


class Phase:
    """A real phase with optional analytic derivatives.

    Missing derivatives fall back to central finite differences of the next
    lower one, with a step scaled to ``|tau|``.
    """

    def __init__(self, h: Callable, dh: Callable | None = None, d2h: Callable | None = None,
                 d3h: Callable | None = None):
        self._h = h
        self._d = [dh, d2h, d3h]

    def h(self, tau):
        return self._h(tau)

    def _fd(self, order: int, tau):
        tau = np.asarray(tau, dtype=float)
        step = 1e-5 * np.maximum(np.abs(tau), 1.0)
        f = self.h if order == 1 else (lambda t: self.derivative(t, order - 1))
        return (f(tau + step) - f(tau - step)) / (2 * step)

    def derivative(self, tau, order: int = 1):
        if order == 0:
            return self.h(tau)
        fn = self._d[order - 1]
        return fn(tau) if fn is not None else self._fd(order, tau)

    def dh(self, tau):
        return self.derivative(tau, 1)

    def d2h(self, tau):
        return self.derivative(tau, 2)

    def d3h(self, tau):
        return self.derivative(tau, 3)

    def __call__(self, tau):
        return self.h(tau)


@dataclass(frozen=True)
class PhaseModel(Phase):
    """One of the three Voronoi phase families.

    ``spectral`` is the weight ``k`` (holo, symsq) or the spectral parameter
    ``T`` (maass). ``x`` is the Voronoi argument, ``theta`` the additive
    frequency and ``N`` the length of the sum, so ``tn = |theta| N``.
    """

    family: str
    spectral: float
    x: float
    theta: float
    N: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown phase family {self.family!r}; choose from {FAMILIES}")
        if not (self.spectral > 0 and self.x > 0 and self.N > 0 and self.theta != 0):
            raise ValueError("need spectral > 0, x > 0, N > 0 and theta != 0")

    @property
    def tn(self) -> float:
        return abs(self.theta) * self.N

    @property
    def tau00(self) -> float | None:
        return self.spectral / 2 if self.family == "holo" else None

    @property
    def _ratio(self) -> float:
        # x / |theta| = xN / tn
        return self.x / abs(self.theta)

    def h(self, tau):
        t = np.asarray(tau, dtype=float)
        a = np.abs(t)
        if self.family == "holo":
            k = self.spectral
            q = t * t + k * k / 4
            return t * np.log((2 * np.pi) ** 2 * math.e * self._ratio * a / q) - k * np.arctan(2 * t / k)
        if self.family == "maass":
            T = self.spectral
            return (
                t * np.log(np.pi**2 * self._ratio * a / math.e)
                - (t + T) * np.log(np.abs(t + T) / (2 * math.e))
                - (t - T) * np.log(np.abs(t - T) / (2 * math.e))
            )
        k = self.spectral
        return t * np.log((2 * np.pi) ** 3 * math.e**2 * self._ratio / (t * t + k * k)) - 2 * k * np.arctan(t / k)

    def derivative(self, tau, order: int = 1):
        if order == 0:
            return self.h(tau)
        t = np.asarray(tau, dtype=float)
        a = np.abs(t)
        if self.family == "holo":
            k = self.spectral
            q = t * t + k * k / 4
            if order == 1:
                return np.log((2 * np.pi) ** 2 * self._ratio * a / q)
            if order == 2:
                return 1 / t - 2 * t / q
            if order == 3:
                return -1 / t**2 - 2 * (k * k / 4 - t * t) / q**2
        elif self.family == "maass":
            T = self.spectral
            if order == 1:
                return np.log((2 * np.pi) ** 2 * self._ratio * a / np.abs(t * t - T * T))
            if order == 2:
                return 1 / t - 1 / (t + T) - 1 / (t - T)
            if order == 3:
                return -1 / t**2 + 1 / (t + T) ** 2 + 1 / (t - T) ** 2
        else:
            k = self.spectral
            q = t * t + k * k
            if order == 1:
                return np.log((2 * np.pi) ** 3 * self._ratio / q)
            if order == 2:
                return -2 * t / q
            if order == 3:
                return -2 * (k * k - t * t) / q**2
        return self._fd(order, tau)


def as_phase(h) -> Phase:
    return h if isinstance(h, Phase) else Phase(h)


# ---------------------------------------------------------------------------
# adaptive Filon quadrature


@dataclass(frozen=True)
class OscResult:
    value: complex
    abs_error_estimate: float
    subdivisions: int


_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)
_ORDERS = np.arange(16)
# c_n = (2n+1)/2 sum_j w_j P_n(x_j) F(x_j)
_PROJ = (
    (2 * _ORDERS[:, None] + 1) / 2
    * np.polynomial.legendre.legvander(_NODES, 15).T
    * _WEIGHTS[None, :]
)
_IPOW = 1j ** _ORDERS


def _filon_panels(g, phase: Phase, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Filon-Legendre rule on each panel ``[a_i, b_i]``; returns values and a roundoff scale."""
    c = (a + b) / 2
    r = (b - a) / 2
    x = c[:, None] + r[:, None] * _NODES[None, :]
    ha = phase.h(a)
    hb = phase.h(b)
    hm = (ha + hb) / 2
    om = (hb - ha) / 2
    hx = phase.h(x)
    gx = np.asarray(g(x.ravel()), dtype=complex).reshape(x.shape)
    F = gx * np.exp(1j * (hx - hm[:, None] - om[:, None] * _NODES[None, :]))
    coef = F @ _PROJ.T
    moments = 2 * _IPOW[None, :] * spherical_jn(_ORDERS[None, :], om[:, None])
    val = r * np.exp(1j * hm) * np.sum(coef * moments, axis=1)
    scale = r * np.max(np.abs(gx), axis=1)
    return val, scale


def osc_integrate(
    g: Callable,
    h,
    interval: tuple[float, float],
    *,
    abs_tol: float | None = None,
    max_panels: int = 20000,
    initial_panels: int = 8,
) -> OscResult:
    """Adaptive integral of ``g(tau) exp(i h(tau))`` over a finite interval.

    Each panel uses a 16-node Filon rule with the phase linearized along its
    chord; the leftover phase is absorbed into the amplitude. Panels are
    bisected until the whole-vs-halves difference meets a length-proportional
    share of ``abs_tol`` (default ``1e-9 * length * max|g|``).
    """
    phase = as_phase(h)
    lo, hi = map(float, interval)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("interval must be finite")
    if hi == lo:
        return OscResult(0j, 0.0, 0)
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    length = hi - lo
    edges = np.linspace(lo, hi, initial_panels + 1)
    a, b = edges[:-1], edges[1:]
    whole, scale = _filon_panels(g, phase, a, b)
    if abs_tol is None:
        gmax = float(np.max(scale / ((b - a) / 2))) if len(scale) else 0.0
        abs_tol = 1e-9 * length * (gmax if gmax > 0 else 1.0)

    accepted: list[np.ndarray] = []
    errors: list[np.ndarray] = []
    n_panels = initial_panels
    eps = np.finfo(float).eps
    while a.size:
        m = (a + b) / 2
        both_a = np.concatenate([a, m])
        both_b = np.concatenate([m, b])
        halves, hscale = _filon_panels(g, phase, both_a, both_b)
        left, right = halves[: a.size], halves[a.size :]
        refined = left + right
        err = np.abs(whole - refined)
        floor = 64 * eps * (hscale[: a.size] + hscale[a.size :])
        ok = err <= np.maximum(abs_tol * (b - a) / length, floor)
        accepted.append(refined[ok])
        errors.append(err[ok])
        bad = ~ok
        n_panels += int(np.count_nonzero(bad))
        if n_panels > max_panels and np.any(bad):
            best = sign * (math.fsum(np.concatenate(accepted).real) + 1j * math.fsum(np.concatenate(accepted).imag)
                           + complex(np.sum(refined[bad])))
            raise ConvergenceError(
                f"osc_integrate exceeded {max_panels} panels on [{lo}, {hi}]", best=best
            )
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    vals = np.concatenate(accepted)
    value = complex(math.fsum(vals.real), math.fsum(vals.imag))
    return OscResult(sign * value, float(math.fsum(np.concatenate(errors))), n_panels)


# ---------------------------------------------------------------------------
# derivative-test bounds

FIRST_DERIVATIVE_CONSTANT = 2.0
SECOND_DERIVATIVE_CONSTANT = 8.0


def _variation(g, dg, lo: float, hi: float, samples: int) -> float:
    """Total variation of ``g`` plus its maximum modulus on ``[lo, hi]``."""
    t = np.linspace(lo, hi, samples)
    gv = np.asarray(g(t), dtype=complex)
    if dg is not None:
        d = np.abs(np.asarray(dg(t), dtype=complex))
        tv = float(np.trapezoid(d, t))
    else:
        tv = float(np.sum(np.abs(np.diff(gv))))
    return tv + float(np.max(np.abs(gv)))


def _monotone_pieces(phase: Phase, lo: float, hi: float, samples: int) -> list[tuple[float, float]]:
    t = np.linspace(lo, hi, samples)
    s = np.sign(phase.d2h(t))
    cuts = [lo]
    for i in np.nonzero(s[1:] * s[:-1] < 0)[0]:
        cuts.append(0.5 * (t[i] + t[i + 1]))
    cuts.append(hi)
    return list(zip(cuts[:-1], cuts[1:]))


def first_derivative_bound(g, h, interval, kappa: float, *, dg=None, samples: int = 4001) -> float:
    """``2 V / kappa`` summed over the pieces on which ``h'`` is monotone.

    ``V`` is the total variation of ``g`` plus its maximum modulus; requires
    ``|h'| >= kappa`` throughout, checked on a dense sample.
    """
    phase = as_phase(h)
    lo, hi = sorted(map(float, interval))
    if kappa <= 0:
        raise PremiseError("kappa must be positive")
    t = np.linspace(lo, hi, samples)
    worst = float(np.min(np.abs(phase.dh(t))))
    if worst < kappa:
        raise PremiseError(f"min |h'| = {worst:.3g} is below kappa = {kappa:.3g}")
    pieces = _monotone_pieces(phase, lo, hi, samples)
    V = sum(_variation(g, dg, p, q, samples) for p, q in pieces)
    return FIRST_DERIVATIVE_CONSTANT * V / kappa


def second_derivative_bound(g, h, interval, lam: float, *, dg=None, samples: int = 4001) -> float:
    """``8 V lam^(-1/2)``; requires ``|h''| >= lam`` throughout."""
    phase = as_phase(h)
    lo, hi = sorted(map(float, interval))
    if lam <= 0:
        raise PremiseError("lambda must be positive")
    t = np.linspace(lo, hi, samples)
    d2 = phase.d2h(t)
    worst = float(np.min(np.abs(d2)))
    if worst < lam:
        raise PremiseError(f"min |h''| = {worst:.3g} is below lambda = {lam:.3g}")
    if np.any(np.sign(d2) != np.sign(d2[0])):
        raise PremiseError("h'' changes sign")
    return SECOND_DERIVATIVE_CONSTANT * _variation(g, dg, lo, hi, samples) / math.sqrt(lam)


# ---------------------------------------------------------------------------
# degenerate stationary point


def _check_transition_regime(pm: PhaseModel, eps: float) -> None:
    if pm.family != "holo":
        raise RegimeError("the cubic Airy model applies to the holomorphic family only")
    k = pm.spectral
    if not (k ** (1 - eps) <= pm.tn <= k ** (1 + eps)):
        raise RegimeError(f"tn = {pm.tn:.4g} outside [k^(1-eps), k^(1+eps)] for k = {k}")


def degenerate_point(pm: PhaseModel, eps: float = 0.05) -> float | None:
    """``k/2`` when the holomorphic phase integrates through it, else ``None``."""
    if pm.family != "holo":
        return None
    k = pm.spectral
    return k / 2 if k ** (1 - eps) <= pm.tn <= k ** (1 + eps) else None


def cubic_airy_predict(pm: PhaseModel, g: Callable, eps: float = 0.05) -> complex:
    """Leading cubic-phase value of ``int g e^{ih}`` around ``tau00 = k/2``.

    Replaces ``h`` by its cubic Taylor polynomial at ``tau00`` and ``g`` by
    ``g(tau00)``: the result is ``2 pi |lam| e^{i h(tau00)} g(tau00) Ai(h'(tau00) lam)``
    with ``lam = (2 / h'''(tau00))^(1/3)``.
    """
    _check_transition_regime(pm, eps)
    t0 = pm.spectral / 2
    d1 = float(pm.dh(t0))
    d3 = float(pm.d3h(t0))
    lam = float(np.cbrt(2.0 / d3))
    h0 = float(pm.h(t0))
    return 2 * math.pi * abs(lam) * complex(math.cos(h0), math.sin(h0)) * complex(g(t0)) * airy(d1 * lam)


def dyadic_shells(inner: float, outer: float) -> list[tuple[float, float]]:
    """Dyadic distance shells ``[2^j inner, 2^(j+1) inner]`` covering ``(inner, outer]``.

    The last shell is clipped at ``outer``.
    """
    if not inner > 0:
        raise ValueError("inner radius must be positive")
    shells = []
    lo = float(inner)
    while lo < outer * (1 - 1e-12):
        hi = min(2 * lo, float(outer))
        shells.append((lo, hi))
        lo = 2 * lo
    return shells
