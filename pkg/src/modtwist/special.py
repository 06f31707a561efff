"""Special-function kernels: log-gamma, Stirling gamma ratios, Airy, bump weights, Mellin transforms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy import fft as _fft
from scipy.special import loggamma as _scipy_loggamma

from .arith import bernoulli_poly
from .exceptions import AdmissibilityError, PoleError, RegimeError

# ---------------------------------------------------------------------------
# log-gamma


def log_gamma(z):
    """Principal branch of ``log Gamma(z)`` for complex ``z`` (scalar or array).

    Backed by ``scipy.special.loggamma``; raises :class:`PoleError` at
    nonpositive integers.
    """
    arr = np.asarray(z, dtype=complex)
    poles = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(poles):
        raise PoleError(f"log_gamma has a pole at {arr[poles].ravel()[0].real:g}")
    out = _scipy_loggamma(arr)
    return complex(out) if np.ndim(z) == 0 else out


# ---------------------------------------------------------------------------
# Stirling expansion of Gamma((1+sigma-i tau+C-delta)/2) / Gamma((-sigma+i tau+C-delta)/2)


@dataclass(frozen=True)
class GammaRatio:
    """Parameters of ``Gamma((1+sigma-i tau+C-delta)/2) / Gamma((-sigma+i tau+C-delta)/2)``."""

    C: float
    delta: float = 0.0
    sigma: float = -0.5
    M: int = 3

    def __post_init__(self):
        if self.C < 0:
            raise AdmissibilityError("C must be nonnegative")
        if not (1 + self.sigma + self.C - self.delta > 0 and -self.sigma + self.C - self.delta > 0):
            raise AdmissibilityError(
                f"need 1+sigma+C-delta > 0 and -sigma+C-delta > 0 (C={self.C}, "
                f"delta={self.delta}, sigma={self.sigma})"
            )
        if self.M < 1:
            raise ValueError("expansion order M must be >= 1")

    def exact(self, tau):
        tau = np.asarray(tau, dtype=float)
        num = (1 + self.sigma - 1j * tau + self.C - self.delta) / 2
        den = (-self.sigma + 1j * tau + self.C - self.delta) / 2
        return np.exp(log_gamma(num) - log_gamma(den))

    def leading(self, tau):
        """Modulus and phase factors of the expansion, without corrections."""
        tau = np.asarray(tau, dtype=float)
        r = np.hypot(self.C, tau) / 2
        phase = -tau * np.log(r / math.e) + (self.delta + 0.5 - self.C) * np.arctan2(tau, self.C)
        return r ** (self.sigma + 0.5) * np.exp(1j * phase)


def stirling_ratio(gr: GammaRatio, tau, *, min_scale: float = 10.0):
    """``M``-term Stirling expansion of the gamma ratio described by ``gr``.

    With ``Z = (C - i tau)/2``, ``a = (1+sigma-delta)/2`` and ``b = (-sigma-delta)/2``
    the ratio is ``Gamma(Z + a) / Gamma(conj(Z) + b)``; each log-gamma gets the
    generalized Stirling series with Bernoulli-polynomial coefficients, truncated
    after ``M - 1`` correction terms, so the relative error is ``O(|Z|^-M)``.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(np.maximum(gr.C, np.abs(tau)) < min_scale):
        raise RegimeError(f"Stirling regime needs max(C, |tau|) >= {min_scale}")
    a = (1 + gr.sigma - gr.delta) / 2
    b = (-gr.sigma - gr.delta) / 2
    Z = (gr.C - 1j * tau) / 2
    Zc = np.conj(Z)
    corr = np.zeros(np.shape(Z), dtype=complex)
    for j in range(1, gr.M):
        coef = (-1) ** (j + 1) / (j * (j + 1))
        corr += coef * (bernoulli_poly(j + 1, a) / Z**j - bernoulli_poly(j + 1, b) / Zc**j)
    out = gr.leading(tau) * np.exp(corr)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Airy function

AI0 = 0.355028053887817239260063186004  # 3^(-2/3) / Gamma(2/3)
AIP0 = 0.258819403792806798405183560189  # 3^(-1/3) / Gamma(1/3)

#: Series is used on ``[AIRY_SWITCH_NEG, AIRY_SWITCH_POS]``; asymptotic expansions outside.
AIRY_SWITCH_POS = 6.0
AIRY_SWITCH_NEG = -6.0


def _airy_series(x: np.ndarray) -> np.ndarray:
    x3 = x**3
    f = np.ones_like(x)
    g = x.copy()
    tf = np.ones_like(x)
    tg = x.copy()
    for k in range(200):
        tf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
        f += tf
        g += tg
        if np.all(np.abs(tf) + np.abs(tg) < 1e-18 * (np.abs(f) + np.abs(g))):
            break
    return AI0 * f - AIP0 * g


def _airy_u(n: int) -> list[float]:
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    return u


_AIRY_U = _airy_u(40)


def _asym_sum(zeta: np.ndarray, signs) -> np.ndarray:
    """Optimally truncated ``sum_k signs(k) u_k zeta^-k`` restricted to ``signs(k) != 0``."""
    total = np.zeros_like(zeta)
    last = np.full(zeta.shape, np.inf)
    live = np.ones(zeta.shape, dtype=bool)
    for k, uk in enumerate(_AIRY_U):
        s = signs(k)
        if s == 0:
            continue
        term = s * uk / zeta**k
        live &= np.abs(term) < last
        total = np.where(live, total + term, total)
        last = np.where(live, np.abs(term), last)
    return total


def airy_asymptotic_pos(x):
    """Full asymptotic expansion of ``Ai(x)`` for large positive ``x``."""
    x = np.asarray(x, dtype=float)
    zeta = 2.0 / 3.0 * x**1.5
    series = _asym_sum(zeta, lambda k: (-1) ** k)
    return np.exp(-zeta) / (2 * math.sqrt(math.pi) * x**0.25) * series


def airy_asymptotic_neg(x):
    """Full asymptotic expansion of ``Ai(x)`` for large negative ``x``."""
    y = -np.asarray(x, dtype=float)
    zeta = 2.0 / 3.0 * y**1.5
    even = _asym_sum(zeta, lambda k: 0 if k % 2 else (-1) ** (k // 2))
    odd = _asym_sum(zeta, lambda k: (-1) ** (k // 2) if k % 2 else 0)
    return (np.cos(zeta - math.pi / 4) * even + np.sin(zeta - math.pi / 4) * odd) / (
        math.sqrt(math.pi) * y**0.25
    )


def airy_leading_pos(x):
    """``exp(-2/3 x^(3/2)) / (2 sqrt(pi) x^(1/4))``."""
    x = np.asarray(x, dtype=float)
    return np.exp(-2.0 / 3.0 * x**1.5) / (2 * math.sqrt(math.pi) * x**0.25)


def airy_leading_neg(x):
    """``sin(2/3 |x|^(3/2) + pi/4) / (sqrt(pi) |x|^(1/4))``."""
    y = -np.asarray(x, dtype=float)
    return np.sin(2.0 / 3.0 * y**1.5 + math.pi / 4) / (math.sqrt(math.pi) * y**0.25)


def airy(x):
    """Airy function ``Ai(x)`` for real ``x`` (scalar or array).

    Maclaurin series on ``[-6, 6]``, asymptotic expansions beyond; absolute
    error below 1e-10 on ``[-50, 20]``.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    mid = (arr >= AIRY_SWITCH_NEG) & (arr <= AIRY_SWITCH_POS)
    pos = arr > AIRY_SWITCH_POS
    neg = arr < AIRY_SWITCH_NEG
    out[mid] = _airy_series(arr[mid])
    out[pos] = airy_asymptotic_pos(arr[pos])
    out[neg] = airy_asymptotic_neg(arr[neg])
    return float(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# bump weights


def _bump_derivative_polys(j_max: int) -> list[Polynomial]:
    # d^j/dt^j exp(1 - 1/(1-t^2)) = exp(...) * P_j(t) / (1-t^2)^(2j)
    D = Polynomial([1.0, 0.0, -1.0])
    t = Polynomial([0.0, 1.0])
    polys = [Polynomial([1.0])]
    for j in range(j_max):
        P = polys[-1]
        polys.append(-2 * t * P + D**2 * P.deriv() + 4 * j * t * D * P)
    return polys


TEMPLATES = ("standard",)


@dataclass(frozen=True)
class BumpWeight:
    """Smooth weight supported on ``[N, 2N]``, ``w(y) = exp(1 - 1/(1 - t^2))`` with ``t = (2y - 3N)/N``.

    ``c[j]`` bounds ``|w^(j)| N^j`` and is measured by dense sampling.
    """

    N: float
    template: str = "standard"
    J_max: int = 4
    c: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.N > 0:
            raise ValueError(f"N must be positive, got {self.N}")
        if self.template not in TEMPLATES:
            raise ValueError(f"unknown bump template {self.template!r}; choose from {TEMPLATES}")
        if not self.c:
            object.__setattr__(self, "c", self._measure_constants())

    def _measure_constants(self, samples: int = 20001) -> tuple[float, ...]:
        t = np.linspace(-1, 1, samples)[1:-1]
        return tuple(
            float(np.max(np.abs(self._template_derivative(t, j))) * 2.0**j)
            for j in range(self.J_max + 1)
        )

    @staticmethod
    def _template_derivative(t: np.ndarray, j: int) -> np.ndarray:
        polys = _bump_derivative_polys(j)
        D = 1.0 - t * t
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            base = np.exp(1.0 - 1.0 / D)
            val = base * polys[j](t) / D ** (2 * j)
        return np.where(np.abs(t) < 1, np.nan_to_num(val), 0.0)

    def derivative(self, y, j: int = 0):
        y = np.asarray(y, dtype=float)
        t = (2 * y - 3 * self.N) / self.N
        out = self._template_derivative(np.atleast_1d(t), j) * (2.0 / self.N) ** j
        return float(out[0]) if y.ndim == 0 else out

    def __call__(self, y):
        return self.derivative(y, 0)


def bump_weight(N: float, template_id: str = "standard", J_max: int = 4) -> BumpWeight:
    return BumpWeight(N=N, template=template_id, J_max=J_max)


# ---------------------------------------------------------------------------
# Mellin transforms of psi(y) = e^{i theta y} w(y)


def mellin_psi(weight: BumpWeight, theta: float, s: complex, **quad_opts) -> complex:
    """``int_0^inf w(x) e^{i theta x} x^s dx/x`` by adaptive oscillatory quadrature."""
    from .oscillatory import Phase, osc_integrate

    s = complex(s)
    sig, tau = -s.real, s.imag

    def amp(x):
        return weight(x) * x ** (-sig - 1.0)

    phase = Phase(
        lambda x: theta * x + tau * np.log(x),
        dh=lambda x: theta + tau / x,
        d2h=lambda x: -tau / x**2,
    )
    return osc_integrate(amp, phase, (weight.N, 2 * weight.N), **quad_opts).value


_TWO_PI_LD = np.longdouble("6.283185307179586476925286766559005768")


def cis(a, b=1.0) -> np.ndarray:
    """``exp(i a b)`` with the product formed and reduced mod 2 pi in extended precision."""
    ph = np.asarray(a, dtype=np.longdouble) * np.asarray(b, dtype=np.longdouble)
    ph = np.fmod(ph, _TWO_PI_LD).astype(float)
    return np.cos(ph) + 1j * np.sin(ph)


def chirp_dft(x: np.ndarray, m: int, step: float) -> np.ndarray:
    """``X_j = sum_n x_n exp(-i step n j)`` for ``j < m`` by Bluestein's algorithm.

    Chirp phases ``step k^2 / 2`` are formed in extended precision, so the
    phase error stays at roundoff level for long inputs.
    """
    x = np.asarray(x, dtype=complex)
    n = x.size
    L = _fft.next_fast_len(n + m - 1)
    k = np.arange(max(n, m), dtype=np.longdouble)
    chirp = cis(-0.5 * k * k, step)
    a = np.zeros(L, dtype=complex)
    a[:n] = x * chirp[:n]
    b = np.zeros(L, dtype=complex)
    b[:m] = np.conj(chirp[:m])
    if n > 1:
        b[L - n + 1 :] = np.conj(chirp[1:n][::-1])
    conv = _fft.ifft(_fft.fft(a) * _fft.fft(b))
    return chirp[:m] * conv[:m]


MELLIN_BLOCK = 2048


def mellin_psi_grid(
    weight: BumpWeight, theta: float, sigma: float, t0: float, dt: float, count: int
) -> np.ndarray:
    """``psi~(-sigma - i t)`` for ``t = t0 + j dt``, ``j < count``.

    Trapezoid rule in ``u = log y`` (spectrally accurate for the compactly
    supported bump) evaluated on the uniform t-grid with one chirp-z transform.
    """
    t_max = max(abs(t0), abs(t0 + dt * (count - 1)))
    band = t_max + 4 * abs(theta) * weight.N + 1000
    hu = math.pi / (2 * band)
    u0 = math.log(weight.N)
    M = int(math.ceil(math.log(2.0) / hu)) + 1
    hu = math.log(2.0) / (M - 1)
    m = np.arange(M)
    u = u0 + hu * m
    y = np.exp(u)
    phi = weight(y) * np.exp(1j * theta * y - sigma * u)
    # blocks keep the Bluestein convolutions short, which keeps FFT roundoff small
    out = np.empty(count, dtype=complex)
    for start in range(0, count, MELLIN_BLOCK):
        nb = min(MELLIN_BLOCK, count - start)
        tb = t0 + dt * start
        X = chirp_dft(phi * cis(-tb * hu, m), nb, dt * hu)
        t = tb + dt * np.arange(nb)
        out[start : start + nb] = hu * X * cis(-t, u0)
    return out


def stationary_phase_mellin(weight: BumpWeight, theta: float, sigma: float, tau: float) -> complex:
    """Leading stationary-phase term of ``int w(x) x^-sigma e^{i theta x} x^{i tau} dx/x``."""
    if abs(tau) < 1 or abs(theta) * weight.N < 1:
        raise RegimeError("stationary phase needs |tau| >= 1 and |theta| N >= 1")
    x0 = -tau / theta
    if x0 <= 0:
        return 0j
    amp = weight(x0) * x0 ** (-sigma)
    phase = tau * math.log(abs(tau / (math.e * theta))) + math.copysign(math.pi / 4, theta)
    return math.sqrt(2 * math.pi) * amp / math.sqrt(abs(tau)) * complex(math.cos(phase), math.sin(phase))
