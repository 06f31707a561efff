"""Voronoi transforms for the three families, summation identities and bound envelopes."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .arith import divisors, kloosterman_table, mod_inverse
from .exceptions import AdmissibilityError, CapacityError, ConvergenceError
from .forms import EigenformTable, SymSquareTable
from .special import BumpWeight, chirp_dft, cis, log_gamma, mellin_psi_grid

FAMILIES = ("holo", "maass", "symsq")
PARITIES = ("even", "odd")


# ---------------------------------------------------------------------------
# transform specification


@dataclass(frozen=True)
class TransformSpec:
    """Which transform to evaluate and how.

    ``spectral`` is the weight ``k`` (holo, symsq) or ``T`` (maass). ``eta``
    selects ``Psi_eta`` for the maass and symsq families; ``parity`` is the
    Maass form parity used by the identity-side combinations.
    """

    family: str
    spectral: float
    weight: BumpWeight
    theta: float = 0.0
    sigma: float = -0.5
    eta: int = 0
    parity: str = "even"
    dt: float = 0.05
    tail_tol: float = 1e-13
    T_max: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.eta not in (0, 1):
            raise ValueError("eta must be 0 or 1")
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}")
        if not self.spectral > 0:
            raise ValueError("spectral parameter must be positive")
        lower = -(self.spectral + 1) / 2 if self.family == "holo" else -1.0
        if not self.sigma > lower:
            raise AdmissibilityError(
                f"sigma = {self.sigma} must exceed {lower} for the {self.family} family"
            )
        if not (0 < self.dt <= 0.5):
            raise ValueError("dt must lie in (0, 0.5]")

    @property
    def N(self) -> float:
        return self.weight.N

    @property
    def tn(self) -> float:
        return abs(self.theta) * self.weight.N

    def replace(self, **changes) -> "TransformSpec":
        from dataclasses import replace

        return replace(self, **changes)


def _log_gamma_factor(spec: TransformSpec, s: np.ndarray, eta: int) -> np.ndarray:
    """``log`` of the family gamma ratio times the ``pi^{-d s}`` factor."""
    lg = log_gamma
    if spec.family == "holo":
        k = spec.spectral
        num = lg((1 + s + (k + 1) / 2) / 2) + lg((1 + s + (k - 1) / 2) / 2)
        den = lg((-s + (k + 1) / 2) / 2) + lg((-s + (k - 1) / 2) / 2)
        return num - den - 2 * s * math.log(math.pi)
    if spec.family == "maass":
        iT = 1j * spec.spectral
        num = lg((1 + s + iT + eta) / 2) + lg((1 + s - iT + eta) / 2)
        den = lg((-s + iT + eta) / 2) + lg((-s - iT + eta) / 2)
        return num - den - 2 * s * math.log(math.pi)
    k = spec.spectral
    num = lg((1 + s + k - eta) / 2) + lg((1 + s + k - 1 + eta) / 2) + lg((1 + s + 1 - eta) / 2)
    den = lg((-s + k - eta) / 2) + lg((-s + k - 1 + eta) / 2) + lg((-s + 1 - eta) / 2)
    return num - den - 3 * s * math.log(math.pi)


def _prefactor(spec: TransformSpec) -> complex:
    # ds = i dt on the vertical line
    if spec.family == "holo":
        return 1j ** (int(spec.spectral) % 4) / (2 * math.pi**2)
    return 1.0 / (2 * math.pi)


# ---------------------------------------------------------------------------
# transform engine


@dataclass(frozen=True)
class TransformValue:
    value: np.ndarray | complex
    err: np.ndarray | float


def _lagrange(v0: float, hv: float, vals: np.ndarray, xq: np.ndarray, order: int = 16) -> np.ndarray:
    pos = (xq - v0) / hv
    i0 = np.clip(np.floor(pos).astype(int) - order // 2 + 1, 0, len(vals) - order)
    rel = pos - i0
    nodes = np.arange(order)
    diff = rel[:, None] - nodes[None, :]
    # barycentric weights for equispaced nodes
    bw = np.array([(-1) ** j * math.comb(order - 1, j) for j in range(order)], dtype=float)
    exact = np.isclose(diff, 0.0, atol=1e-14)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = bw[None, :] / diff
        out = np.sum(q * vals[i0[:, None] + nodes[None, :]], axis=1) / np.sum(q, axis=1)
    hit = np.any(exact, axis=1)
    if np.any(hit):
        j = np.argmax(exact[hit], axis=1)
        out[hit] = vals[i0[hit] + j]
    return out


class VoronoiTransform:
    """Numerical ``Psi`` for one :class:`TransformSpec`.

    The vertical-line integral is discretized on a uniform ``t`` grid (step
    ``dt``) truncated where the integrand falls below ``tail_tol`` times its
    peak. The error estimate is the difference to the ``2 dt`` rule plus the
    discarded tail.
    """

    MAX_T = 2.0e5
    TAIL_LENGTH = 500.0

    def __init__(self, spec: TransformSpec):
        self.spec = spec
        self._W: dict[int, np.ndarray] = {}
        self._tail: dict[int, float] = {}
        self.t = self._choose_grid()

    # -- grid ---------------------------------------------------------------

    def _integrand(self, t0: float, dt: float, count: int, eta: int) -> np.ndarray:
        spec = self.spec
        t = t0 + dt * np.arange(count)
        pt = mellin_psi_grid(spec.weight, spec.theta, spec.sigma, t0, dt, count)
        return _prefactor(spec) * np.exp(_log_gamma_factor(spec, spec.sigma + 1j * t, eta)) * pt

    def _choose_grid(self) -> np.ndarray:
        spec = self.spec
        if spec.T_max is not None:
            T = float(spec.T_max)
        else:
            T = 4 * (spec.tn + 1) + 2 * spec.spectral + 1000
            while True:
                probe = -T + (T / 2000) * np.arange(4001)
                mag = np.abs(self._integrand(-T, T / 2000, 4001, spec.eta))
                above = np.nonzero(mag > spec.tail_tol * mag.max())[0]
                if above[0] >= 40 and above[-1] < probe.size - 40:
                    T = max(abs(probe[above[0]]), abs(probe[above[-1]])) + 20
                    break
                T *= 2
                if T > self.MAX_T:
                    raise ConvergenceError(f"transform integrand does not decay by |t| = {self.MAX_T:g}")
        J = 2 * int(math.ceil(T / spec.dt)) + 1
        return -T + spec.dt * np.arange(J)

    def weights(self, eta: int | None = None) -> np.ndarray:
        eta = self.spec.eta if eta is None else eta
        if eta not in self._W:
            W = self._integrand(float(self.t[0]), self.spec.dt, self.t.size, eta)
            self._W[eta] = W
            self._tail[eta] = float(max(abs(W[0]), abs(W[-1])))
        return self._W[eta]

    # -- evaluation ---------------------------------------------------------

    def _direct(self, W: np.ndarray, x: np.ndarray):
        spec = self.spec
        dt = spec.dt
        v = np.log(x)
        out = np.empty(x.size, dtype=complex)
        half = np.empty(x.size, dtype=complex)
        for i, vi in enumerate(v):
            e = cis(-self.t, vi) * W
            out[i] = dt * np.sum(e)
            half[i] = 2 * dt * np.sum(e[::2])
        scale = np.exp(-spec.sigma * v)
        return out * scale, half * scale

    def _grid(self, W: np.ndarray, t: np.ndarray, dt: float, v0: float, hv: float, L: int) -> np.ndarray:
        Y = chirp_dft(W * cis(-t, v0), L, dt * hv)
        v = v0 + hv * np.arange(L)
        return dt * Y * cis(-t[0], v - v0) * np.exp(-self.spec.sigma * v)

    def _many(self, W: np.ndarray, x: np.ndarray):
        dt = self.spec.dt
        T = -self.t[0]
        hv = math.pi / (8 * T)
        v = np.log(x)
        v0 = v.min() - 10 * hv
        L = int((v.max() - v0) / hv) + 20
        full = self._grid(W, self.t, dt, v0, hv, L)
        half = self._grid(W[::2], self.t[::2], 2 * dt, v0, hv, L)
        return _lagrange(v0, hv, full, v), _lagrange(v0, hv, half, v)

    def evaluate(self, x, eta: int | None = None) -> TransformValue:
        """``Psi_eta(x)`` with its error estimate; ``x`` scalar or array."""
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xa <= 0):
            raise ValueError("x must be positive")
        eta = self.spec.eta if eta is None else eta
        W = self.weights(eta)
        full, half = self._direct(W, xa) if xa.size <= 64 else self._many(W, xa)
        # tail beyond the cut modelled as exponential decay over TAIL_LENGTH in t
        tail = self._tail[eta] * 2 * self.TAIL_LENGTH * np.exp(-self.spec.sigma * np.log(xa))
        err = np.abs(full - half) + tail
        if np.ndim(x) == 0:
            return TransformValue(complex(full[0]), float(err[0]))
        return TransformValue(full, err)

    def __call__(self, x, eta: int | None = None):
        return self.evaluate(x, eta).value

    # -- combinations --------------------------------------------------------

    def maass_parity(self, x) -> dict[str, np.ndarray | complex]:
        """``Psi_+^e, Psi_-^e, Psi_+^o, Psi_-^o`` from ``Psi_0`` and ``Psi_1``."""
        if self.spec.family != "maass":
            raise ValueError("parity combinations exist for the maass family only")
        p0 = self(x, 0)
        p1 = self(x, 1)
        plus = (p0 + p1) / (2 * math.pi)
        minus = (p0 - p1) / (2 * math.pi)
        return {"+e": plus, "-e": minus, "+o": minus, "-o": plus}

    def gl3_pm(self, x) -> tuple:
        """``(Psi_+, Psi_-) = (Psi_0 -+ i Psi_1) / (2 pi^(3/2))``."""
        if self.spec.family != "symsq":
            raise ValueError("Psi_+- exist for the symsq family only")
        p0 = self(x, 0)
        p1 = self(x, 1)
        c = 2 * math.pi**1.5
        return (p0 - 1j * p1) / c, (p0 + 1j * p1) / c


def transform(spec: TransformSpec, x) -> TransformValue:
    return VoronoiTransform(spec).evaluate(x)


# ---------------------------------------------------------------------------
# Bessel-kernel oracle


def bessel_kernel_check(k: int, weight: BumpWeight, x, theta: float = 0.0, scale: float = 1.0):
    """``2 pi i^k x int psi(y) J_{k-1}(4 pi sqrt(x y)) dy`` by composite Gauss-Legendre.

    ``psi(y) = scale * e^{i theta y} w(y)``.
    """
    from scipy.special import jv

    xa = np.atleast_1d(np.asarray(x, dtype=float))
    N = weight.N
    nodes, wts = np.polynomial.legendre.leggauss(20)
    out = np.empty(xa.size, dtype=complex)
    for i, xi in enumerate(xa):
        cycles = 2 * math.sqrt(xi) * (math.sqrt(2 * N) - math.sqrt(N)) + abs(theta) * N / (2 * math.pi)
        panels = int(max(64, 4 * cycles))
        edges = np.linspace(N, 2 * N, panels + 1)
        c = (edges[:-1] + edges[1:]) / 2
        r = (edges[1:] - edges[:-1]) / 2
        y = (c[:, None] + r[:, None] * nodes[None, :]).ravel()
        f = weight(y) * np.exp(1j * theta * y) * jv(k - 1, 4 * math.pi * np.sqrt(xi * y))
        out[i] = np.sum((f.reshape(panels, -1) * wts[None, :]).sum(axis=1) * r)
    out = 2 * math.pi * 1j ** (k % 4) * xa * scale * out
    return complex(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# summation identities


@dataclass
class IdentityResult:
    lhs: complex
    rhs: complex
    residual: float
    n_terms: int
    truncation_change: float
    history: list[tuple[int, float]] = field(default_factory=list)
    orientation: dict[str, float] = field(default_factory=dict)


def _residual(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1)


def _e(x: np.ndarray) -> np.ndarray:
    return np.exp(2j * math.pi * x)


def _csum(z: np.ndarray) -> complex:
    return complex(math.fsum(np.real(z)), math.fsum(np.imag(z)))


def _lhs(coeffs: np.ndarray, weight: BumpWeight, theta: float, a: int, c: int) -> complex:
    lo = int(math.floor(weight.N))
    hi = int(math.ceil(2 * weight.N))
    if hi >= coeffs.size:
        raise CapacityError(f"coefficient table of length {coeffs.size - 1} does not cover n <= {hi}")
    n = np.arange(max(lo, 1), hi + 1)
    terms = coeffs[n] * _e((n * a % c) / c) * np.exp(1j * theta * n) * weight(n.astype(float))
    return _csum(terms)


def _truncation_history(terms: np.ndarray, lhs: complex, n0: int) -> tuple[int, list[tuple[int, float]]]:
    partial = np.cumsum(terms)
    hist = []
    n = max(16, n0 // 8)
    while n <= terms.size:
        hist.append((n, _residual(lhs, complex(partial[n - 1]))))
        n *= 2
    return n0, hist


def _pick_n0(terms: np.ndarray, target: float, scale: float) -> int:
    big = np.nonzero(np.abs(terms) >= 1e-3 * target * scale)[0]
    return int(big[-1]) + 1 if big.size else 1


def voronoi_identity_residual(
    family: str,
    table,
    d: int,
    c: int,
    weight: BumpWeight,
    *,
    theta: float = 0.0,
    target: float = 1e-6,
    n_max: int | None = None,
    dt: float = 0.05,
) -> IdentityResult:
    """Both sides of the Voronoi identity and their relative residual.

    ``holo`` uses an :class:`EigenformTable`; ``symsq`` a :class:`SymSquareTable`.
    The dual sum runs to the last term above ``1e-3 * target`` (relative to
    the left side) and is then doubled until the partial sums settle.
    """
    if math.gcd(d, c) != 1 or c == 0:
        raise ValueError("need gcd(d, c) = 1 and c != 0")
    c = abs(c)
    dbar = mod_inverse(d, c)
    if family == "holo":
        if not isinstance(table, EigenformTable):
            raise TypeError("holo identity needs an EigenformTable")
        return _holo_identity(table, d, dbar, c, weight, theta, target, n_max, dt)
    if family == "symsq":
        if not isinstance(table, SymSquareTable):
            raise TypeError("symsq identity needs a SymSquareTable")
        return _symsq_identity(table, d, dbar, c, weight, theta, target, n_max, dt)
    raise ValueError(
        "identity checks exist for 'holo' and 'symsq'; Maass transforms are validated through "
        "envelopes and parity algebra"
    )


def _finish(lhs, terms_fn, capacity, target, n_max):
    """Run the truncation policy given ``terms_fn(n_cap) -> per-n dual terms``."""
    cap = capacity if n_max is None else min(capacity, n_max)
    terms = terms_fn(cap)
    scale = abs(lhs) + 1
    n0 = _pick_n0(terms, target, scale)
    n = min(max(2 * n0, 32), cap)
    rhs = _csum(terms[:n])
    change = abs(rhs - _csum(terms[: max(n // 2, 1)]))
    while change > target * scale and n < cap:
        n = min(2 * n, cap)
        prev, rhs = rhs, _csum(terms[:n])
        change = abs(rhs - prev)
    _, hist = _truncation_history(terms, lhs, n)
    return n, rhs, change, hist


def _holo_identity(table, d, dbar, c, weight, theta, target, n_max, dt) -> IdentityResult:
    lam = table.lam
    lhs = _lhs(lam, weight, theta, dbar, c)
    engine = VoronoiTransform(TransformSpec("holo", table.k, weight, theta=theta, dt=dt))
    capacity = lam.size - 1

    def dual(a: int):
        def terms(n_cap):
            n = np.arange(1, n_cap + 1)
            psi = engine(n / c**2)
            return c * lam[1 : n_cap + 1] / n * _e((-n * a % c) / c) * psi
        return terms

    n, rhs, change, hist = _finish(lhs, dual(d), capacity, target, n_max)
    res = _residual(lhs, rhs)
    # d <-> dbar relabelling must also hold; the opposite sign on the dual side must not
    lhs_swap = _lhs(lam, weight, theta, d, c)
    rhs_swap = _csum(dual(dbar)(n))
    rhs_flip = _csum(dual(-d % c)(n))
    orientation = {
        "theorem": res,
        "swapped": _residual(lhs_swap, rhs_swap),
        "sign_flipped": _residual(lhs, rhs_flip),
    }
    return IdentityResult(lhs, rhs, res, n, change, hist, orientation)


def _symsq_identity(table, d, dbar, c, weight, theta, target, n_max, dt) -> IdentityResult:
    A1 = table.A1
    lhs = _lhs(A1, weight, theta, dbar, c)
    engine = VoronoiTransform(TransformSpec("symsq", table.k, weight, theta=theta, dt=dt))
    capacity = table.N_max

    def dual(dd: int):
        def terms(n_cap):
            total = np.zeros(n_cap, dtype=complex)
            n2 = np.arange(1, n_cap + 1)
            for n1 in divisors(c):
                cc = c // n1
                x = n2 * n1**2 / c**3
                pp, pm = engine.gl3_pm(x)
                A = table.A_row(n1, n_cap)[1:]
                Kp = kloosterman_table(dd, cc, n2 % cc)
                Km = kloosterman_table(dd, cc, -n2 % cc)
                total += c * A / (n1 * n2) * (Kp * pp + Km * pm)
            return total
        return terms

    n, rhs, change, hist = _finish(lhs, dual(d), capacity, target, n_max)
    res = _residual(lhs, rhs)
    lhs_swap = _lhs(A1, weight, theta, d, c)
    rhs_swap = _csum(dual(dbar)(n))
    orientation = {"theorem": res, "swapped": _residual(lhs_swap, rhs_swap)}
    return IdentityResult(lhs, rhs, res, n, change, hist, orientation)


# ---------------------------------------------------------------------------
# bound envelopes


@dataclass(frozen=True)
class EnvelopeConstants:
    """Explicit constants replacing the asymptotic comparisons.

    A comparison ``X << Y`` is read as ``X <= c * Y`` with the matching constant.
    """

    eps: float = 0.05
    A: float = 10.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0


@dataclass(frozen=True)
class BoundEnvelope:
    M: float
    E: float
    U: float
    Delta: float
    regime: str
    decay: bool

    @property
    def total(self) -> float:
        return self.M + self.E


def bound_envelope(
    family: str,
    spectral: float,
    tn: float,
    x: float,
    N: float,
    eps: float | None = None,
    A: float | None = None,
    constants: EnvelopeConstants | None = None,
) -> BoundEnvelope:
    """Envelope ``M + E`` for ``|Psi(x)|`` with the regime that selected ``E``."""
    const = constants or EnvelopeConstants()
    eps = const.eps if eps is None else eps
    A = const.A if A is None else A
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if spectral <= 0 or N <= 0 or x <= 0 or tn < 0:
        raise ValueError("need spectral, N, x positive and tn nonnegative")
    k = spectral
    xN = x * N
    scale = (N * k) ** eps
    if family == "holo":
        U = max(k * k, tn * tn)
        Delta = abs(xN - tn * k / (2 * math.pi) ** 2)
        M = math.sqrt(U) * scale * (1 + xN / (U * scale)) ** (-A)
        if not (k ** (1 - eps) <= tn <= k ** (1 + eps)):
            E, regime = 0.0, "E-zero: tn outside [k^(1-eps), k^(1+eps)]"
        elif Delta <= const.c1 * k ** (4 / 3 + eps):
            E, regime = k ** (7 / 6 + eps), "E-case-1: Delta <= c1 k^(4/3+eps)"
        elif Delta <= const.c2 * k ** (2 + eps):
            E, regime = k ** (3 / 2 + eps) / Delta**0.25, "E-case-2: k^(4/3+eps) < Delta <= c2 k^(2+eps)"
        else:
            E, regime = 0.0, "E-zero: Delta beyond c2 k^(2+eps)"
    elif family == "maass":
        U = max(k * k, tn * tn)
        Delta = float("nan")
        M = math.sqrt(U) * scale * (1 + xN / (U * scale)) ** (-A)
        E, regime = 0.0, "E-zero: maass"
    else:
        U = max(k * k, tn * k * k, tn**3)
        Delta = abs(xN - tn * k * k / (2 * math.pi) ** 3)
        M = max(k, tn**1.5) * scale * (1 + xN / (U * scale)) ** (-A)
        if k ** (2 / 3) <= tn <= k ** (1 - eps) and Delta <= const.c1 * tn**3:
            E, regime = k * k / math.sqrt(tn), "E-case-1: Delta <= c1 tn^3"
        elif k ** (2 / 3) <= tn <= k ** (1 - eps) and Delta <= const.c2 * tn * k * k:
            E, regime = k**3 * tn / Delta, "E-case-2: tn^3 < Delta <= c2 tn k^2"
        elif k**eps <= tn <= k ** (2 / 3) and Delta <= const.c3 * tn * k * k:
            E, regime = tn * k * min(1.0, k * k / Delta) if Delta > 0 else tn * k, "E-case-3: Delta <= c3 tn k^2"
        else:
            E, regime = 0.0, "E-zero: symsq"
    return BoundEnvelope(M, E, U, Delta, regime, xN >= U * scale)


# ---------------------------------------------------------------------------
# envelope validation

CSV_COLUMNS = ("family", "k_or_T", "theta", "N", "x", "re_psi", "im_psi", "err_est", "M", "E", "regime", "ratio")


@dataclass(frozen=True)
class GridPoint:
    spectral: float
    tn: float
    x: float


@dataclass
class ValidationReport:
    family: str
    rows: list[dict]
    C: float
    slope: float
    per_k: dict[float, float]
    decay_margin: float
    misclassified: int
    ceiling: float

    @property
    def passed(self) -> bool:
        return self.C <= self.ceiling and self.misclassified == 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: r[k] for k in CSV_COLUMNS})
        return buf.getvalue()


def standard_grid(
    family: str,
    ks=(12, 16, 22, 30, 40, 55, 75, 100, 140, 200),
    r_values=(1e-3, 1e-2, 0.1, 0.5),
    N: float = 1000.0,
    eps: float = 0.05,
) -> list[GridPoint]:
    """Default validation grid: per ``k`` four ``tn`` values and five ``x`` values.

    ``x`` runs over ``r = xN/(U (Nk)^eps)`` in ``r_values`` plus one point at the
    transition ``Delta = 0`` (``r = 0.2`` where there is none). All default points
    lie below the decay threshold ``r = 1``.
    """
    grid = []
    for k in ks:
        if family == "symsq":
            tns = (0.0, k**0.5, k**0.8, float(k))
        else:
            tns = (0.0, k**0.5, float(k), 2.0 * k)
        for tn in tns:
            env = bound_envelope(family, k, tn, 1.0, N, eps=eps)
            base = env.U * (N * k) ** eps / N
            xs = [r * base for r in r_values]
            if family == "holo" and tn > 0:
                xs.append(tn * k / (2 * math.pi) ** 2 / N)
            elif family == "symsq" and tn > 0:
                xs.append(tn * k * k / (2 * math.pi) ** 3 / N)
            else:
                xs.append(0.2 * base)
            grid.extend(GridPoint(float(k), float(tn), float(x)) for x in xs)
    return grid


def envelope_validation(
    family: str,
    grid: list[GridPoint] | None = None,
    *,
    N: float = 1000.0,
    eta: int = 0,
    constants: EnvelopeConstants | None = None,
    ceiling: float = 100.0,
    dt: float = 0.05,
) -> ValidationReport:
    """Measured ``|Psi|`` against ``M + E`` on a grid of ``(k or T, tn, x)``.

    Points sharing ``(k, tn)`` share one transform, so the integrand is built
    once per pair.
    """
    const = constants or EnvelopeConstants()
    grid = standard_grid(family, N=N, eps=const.eps) if grid is None else list(grid)
    groups: dict[tuple[float, float], list[int]] = {}
    for i, p in enumerate(grid):
        groups.setdefault((p.spectral, p.tn), []).append(i)
    values = np.empty(len(grid), dtype=complex)
    errors = np.empty(len(grid))
    for (k, tn), idx in groups.items():
        spec = TransformSpec(family, k, BumpWeight(N), theta=tn / N, eta=eta, dt=dt)
        res = VoronoiTransform(spec).evaluate(np.array([grid[i].x for i in idx]))
        values[idx] = res.value
        errors[idx] = res.err

    rows = []
    misclassified = 0
    for p, val, err in zip(grid, values, errors):
        env = bound_envelope(family, p.spectral, p.tn, p.x, N, constants=const)
        if family == "holo":
            in_window = p.spectral ** (1 - const.eps) <= p.tn <= p.spectral ** (1 + const.eps)
            misclassified += in_window == env.regime.startswith("E-zero: tn")
        rows.append(
            {
                "family": family,
                "k_or_T": p.spectral,
                "theta": p.tn / N,
                "N": N,
                "x": p.x,
                "re_psi": val.real,
                "im_psi": val.imag,
                "err_est": float(err),
                "M": env.M,
                "E": env.E,
                "regime": env.regime,
                "ratio": abs(val) / env.total,
                "decay": env.decay,
            }
        )
    ratios = np.array([r["ratio"] for r in rows])
    C = float(ratios.max())
    per_k: dict[float, float] = {}
    for r in rows:
        per_k[r["k_or_T"]] = max(per_k.get(r["k_or_T"], 0.0), r["ratio"])
    ks = np.array(sorted(per_k))
    slope = float(np.polyfit(np.log(ks), np.log([per_k[k] for k in ks]), 1)[0]) if ks.size > 1 else 0.0
    decay = [r["ratio"] for r in rows if r["decay"]]
    margin = C / max(decay) if decay and max(decay) > 0 else float("inf")
    return ValidationReport(family, rows, C, slope, per_k, margin, misclassified, ceiling)
