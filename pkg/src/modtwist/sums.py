"""Twisted sums of Hecke eigenvalues, exponent scans and van der Corput checkers."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .arith import divisor_count_sieve, primes_up_to
from .exceptions import CapacityError, PremiseError
from .forms import EigenformTable, SymSquareTable
from .oscillatory import Phase
from .special import BumpWeight

# ---------------------------------------------------------------------------
# coefficient sources


@dataclass(frozen=True, eq=False)
class SyntheticSequence:
    """A fixed real coefficient sequence with ``values[0] = 0``."""

    name: str
    values: np.ndarray
    seed: int | None = None

    @property
    def N_max(self) -> int:
        return self.values.size - 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def constant_sequence(n_max: int) -> SyntheticSequence:
    v = np.ones(n_max + 1)
    v[0] = 0.0
    return SyntheticSequence("ones", _frozen(v))


def random_signs(n_max: int, seed: int = 0) -> SyntheticSequence:
    rng = np.random.default_rng(seed)
    v = rng.choice([-1.0, 1.0], size=n_max + 1)
    v[0] = 0.0
    return SyntheticSequence("random", _frozen(v), seed)


def hecke_synthetic(
    n_max: int, seed: int = 0, delta_max: float = 7 / 64, nontempered_fraction: float = 0.1
) -> SyntheticSequence:
    """Random multiplicative sequence obeying the Hecke recursion at every prime.

    ``lambda(p) = alpha_p + 1/alpha_p`` with either ``alpha_p = e^{i phi}``
    (tempered) or ``alpha_p = +-p^delta``, ``0 < delta <= delta_max``, so that
    ``|lambda(p)| <= 2 p^delta_max``.
    """
    rng = np.random.default_rng(seed)
    v = np.zeros(n_max + 1)
    v[1] = 1.0 if n_max >= 1 else 0.0
    lam_pp: dict[int, list[float]] = {}
    for p in primes_up_to(n_max):
        p = int(p)
        if rng.random() < nontempered_fraction:
            a = float(p) ** rng.uniform(0.0, delta_max) * rng.choice([-1.0, 1.0])
            lp = a + 1.0 / a
        else:
            lp = 2.0 * math.cos(rng.uniform(0.0, math.pi))
        seq = [1.0, lp]
        q = p * p
        while q <= n_max:
            seq.append(lp * seq[-1] - seq[-2])
            q *= p
        lam_pp[p] = seq
    # multiplicative fill via smallest prime factor
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in lam_pp:
        spf[p::p] = np.where(spf[p::p] == 0, p, spf[p::p])
    for n in range(2, n_max + 1):
        p = int(spf[n])
        rest, e = n // p, 1
        while rest % p == 0:
            rest //= p
            e += 1
        v[n] = lam_pp[p][e] * v[rest]
    return SyntheticSequence("maass-synthetic", _frozen(v), seed)


def coefficient_values(source, n_max: int) -> np.ndarray:
    """Array ``c[0..n_max]`` of real coefficients from any supported source."""
    if isinstance(source, EigenformTable):
        arr, have = source.lam, source.N_max
    elif isinstance(source, SymSquareTable):
        arr, have = source.A1, source.N_max
    elif isinstance(source, SyntheticSequence):
        arr, have = source.values, source.N_max
    else:
        arr = np.asarray(source, dtype=float)
        have = arr.size - 1
    if n_max > have:
        raise CapacityError(f"coefficient table stops at {have}, need {n_max}")
    return arr[: n_max + 1]


# ---------------------------------------------------------------------------
# twisted sums


@dataclass(frozen=True)
class TwistSpec:
    """Sum ``sum lambda(n) e(alpha n + beta n^theta_exp) w(n)``.

    ``window`` is ``"sharp"`` (``1 <= n <= N``) or a :class:`BumpWeight`
    (support ``[W.N, 2 W.N]``).
    """

    coefficients: object
    alpha: float = 0.0
    beta: float = 0.0
    theta_exp: float = 0.0
    window: str | BumpWeight = "sharp"

    def __post_init__(self):
        if not 0.0 <= self.theta_exp < 1.0:
            raise ValueError(f"theta_exp must lie in [0, 1), got {self.theta_exp}")
        if not (self.window == "sharp" or isinstance(self.window, BumpWeight)):
            raise ValueError("window must be 'sharp' or a BumpWeight")

    def support(self, N: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Integers in the window and the weight at each."""
        if isinstance(self.window, BumpWeight):
            W = self.window
            if N is not None and N != W.N:
                raise ValueError(f"window scale {W.N} inconsistent with N = {N}")
            n = np.arange(math.floor(W.N) + 1, math.ceil(2 * W.N), dtype=np.int64)
            return n, W(n.astype(float))
        if N is None:
            raise ValueError("sharp window needs N")
        n = np.arange(1, int(N) + 1, dtype=np.int64)
        return n, np.ones(n.size)


def _unit_phase(n: np.ndarray, alpha: float, beta: float, theta: float) -> np.ndarray:
    """``alpha n + beta n^theta`` reduced to ``[-1/2, 1/2]``.

    The symmetric reduction maps ``-alpha`` to exactly the negated phase, so
    conjugate symmetry of the sums holds bit for bit.
    """
    ph = _centre(alpha * n.astype(float))
    if beta != 0.0:
        ph = _centre(ph + beta * n.astype(float) ** theta)
    return ph


def _centre(x: np.ndarray) -> np.ndarray:
    return x - np.round(x)


def _cos_sin(ph: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``cos, sin`` of ``2 pi ph`` for centred ``ph``; ``e(+-1/2)`` is exactly ``-1``."""
    a = 2.0 * np.pi * ph
    return np.cos(a), np.where(np.abs(ph) == 0.5, 0.0, np.sin(a))


def twisted_sum(spec: TwistSpec, N: int | None = None) -> complex:
    """Correctly rounded (``math.fsum``) twisted sum, independent of chunking."""
    n, w = spec.support(N)
    c = coefficient_values(spec.coefficients, int(n[-1]) if n.size else 0)[n] * w
    cs, sn = _cos_sin(_unit_phase(n, spec.alpha, spec.beta, spec.theta_exp))
    return complex(math.fsum(c * cs), math.fsum(c * sn))


def nonlinear_sum(spec: TwistSpec, N: int | None = None) -> complex:
    """``sum lambda(n) e(beta n^theta + alpha n) w(n)``; equals :func:`twisted_sum`."""
    return twisted_sum(spec, N)


def _chunked_sums(c: np.ndarray, n: np.ndarray, alphas: np.ndarray, beta: float, theta: float, threads: int = 1):
    """``sum_n c_n e(alpha n + beta n^theta)`` for each alpha.

    Each alpha is an independent pairwise reduction, so results do not
    depend on the chunking or the thread count.
    """
    base = _centre(beta * n.astype(float) ** theta) if beta else 0.0
    nf = n.astype(float)
    chunk = max(1, 2**22 // max(n.size, 1))
    starts = range(0, alphas.size, chunk)

    def work(i0: int) -> np.ndarray:
        a = alphas[i0 : i0 + chunk, None]
        cs, sn = _cos_sin(_centre(_centre(a * nf[None, :]) + base))
        return np.sum(c * cs, axis=1) + 1j * np.sum(c * sn, axis=1)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(i) for i in starts]
    return np.concatenate(parts) if parts else np.zeros(0, complex)


# ---------------------------------------------------------------------------
# alpha samplers


def farey_fractions(Q: float) -> np.ndarray:
    """All reduced ``a/q`` in ``[0, 1)`` with ``q <= Q``, sorted."""
    Q = int(math.floor(Q))
    out = {0.0}
    for q in range(2, Q + 1):
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                out.add(a / q)
    return np.array(sorted(out))


def low_discrepancy_alphas(count: int, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in ``[0, 1)``."""
    if count <= 0:
        return np.zeros(0)
    return qmc.Halton(d=1, scramble=True, seed=seed).random(count)[:, 0]


def alpha_sample(N: float, k: float, n_random: int = 256, seed: int = 0) -> np.ndarray:
    """Farey fractions with ``q <= N^(1/2) k^(-1/2)`` plus low-discrepancy randoms."""
    Q = max(1.0, math.sqrt(N / k))
    return np.concatenate([farey_fractions(Q), low_discrepancy_alphas(n_random, seed)])


# ---------------------------------------------------------------------------
# scans

SCAN_COLUMNS = ("family", "k", "N", "alpha", "re_S", "im_S", "abs_S", "normalized_ratio")
SUP_NOTE = "sup over sampled alpha; a lower bound for the true supremum"


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def _check_grid(N_grid: Sequence[int]) -> np.ndarray:
    Ns = np.asarray(N_grid, dtype=np.int64)
    if Ns.size < 5:
        raise ValueError(f"N grid needs at least 5 points, got {Ns.size}")
    r = Ns[1:] / Ns[:-1]
    if np.any(Ns <= 0) or not np.allclose(r, r[0], rtol=1e-9) or r[0] <= 1:
        raise ValueError("N grid must be increasing and geometric")
    return Ns


@dataclass
class ScanReport:
    family: str
    k: float
    rows: list[dict]
    slope: float
    tolerance: float | None = None
    kind: str = "exponent"
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.tolerance is None or self.slope <= self.tolerance

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in self.rows:
            w.writerow({c: (repr(r[c]) if isinstance(r[c], float) else r[c]) for c in SCAN_COLUMNS})
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "family": self.family,
            "k": self.k,
            "kind": self.kind,
            "slope": self.slope,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "N": [int(r["N"]) for r in self.rows],
            "sup_abs_S": [r["abs_S"] for r in self.rows],
            "note": SUP_NOTE,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def plot_data(self) -> str:
        """Two columns ``N  sup|S|`` for gnuplot."""
        return "".join(f"{int(r['N'])} {r['abs_S']!r}\n" for r in self.rows)


def _source_for(family: str, k: int, n_max: int, seed: int, table=None):
    from .forms import build_eigenform, sym_square

    if table is not None:
        return table
    if family == "holo":
        return build_eigenform(k, n_max)
    if family == "symsq":
        return sym_square(build_eigenform(k, n_max))
    if family == "ones":
        return constant_sequence(n_max)
    if family == "random":
        return random_signs(n_max, seed)
    if family == "maass-synthetic":
        return hecke_synthetic(n_max, seed)
    raise ValueError(f"unknown family {family!r}")


def _normalizer(family: str, N: float, k: float) -> float:
    return N**0.75 * math.sqrt(k) if family == "symsq" else math.sqrt(N * k)


def exponent_scan(
    family: str,
    N_grid: Sequence[int],
    k: int = 12,
    *,
    table=None,
    alpha_sampler: Callable[[float, float], np.ndarray] | None = None,
    n_random: int = 256,
    seed: int = 0,
    beta: float = 0.0,
    theta: float = 0.0,
    tolerance: float | None = None,
    threads: int = 1,
) -> ScanReport:
    """Slope of ``log sup_alpha |sum_{n <= N} c(n) e(alpha n + beta n^theta)|`` in ``log N``."""
    Ns = _check_grid(N_grid)
    src = _source_for(family, k, int(Ns[-1]), seed, table)
    sampler = alpha_sampler or (lambda N, kk: alpha_sample(N, kk, n_random, seed))
    rows = []
    for N in Ns:
        N = int(N)
        n = np.arange(1, N + 1, dtype=np.int64)
        c = coefficient_values(src, N)[1:]
        alphas = np.asarray(sampler(N, k), dtype=float)
        S = _chunked_sums(c, n, alphas, beta, theta, threads)
        i = int(np.argmax(np.abs(S)))
        rows.append(
            {
                "family": family,
                "k": k,
                "N": N,
                "alpha": float(alphas[i]),
                "re_S": float(S[i].real),
                "im_S": float(S[i].imag),
                "abs_S": float(abs(S[i])),
                "normalized_ratio": float(abs(S[i]) / _normalizer(family, N, k)),
            }
        )
    slope = fit_slope([r["N"] for r in rows], [r["abs_S"] for r in rows])
    extra = {"beta": beta, "theta": theta} if beta else {}
    return ScanReport(family, k, rows, slope, tolerance, extra=extra)


def sun_exponent_scan(
    table, N_grid: Sequence[int], beta: float, theta: float, *, n_random: int = 256, seed: int = 0, threads: int = 1
) -> ScanReport:
    """Sharp-window nonlinear scan; the tolerance is ``1/2 + theta/2 + 0.05``."""
    fam = "symsq" if isinstance(table, SymSquareTable) else "holo"
    k = getattr(table, "k", 12)
    rep = exponent_scan(
        fam, N_grid, k, table=table, n_random=n_random, seed=seed, beta=beta, theta=theta,
        tolerance=0.5 + theta / 2 + 0.05, threads=threads,
    )
    rep.kind = "nonlinear"
    return rep


@dataclass
class ResonanceReport:
    N: list[int]
    S: list[complex]
    normalized: list[complex]
    drift: list[float]
    tolerance: float = 0.05

    @property
    def passed(self) -> bool:
        return all(d <= self.tolerance for d in self.drift)

    def summary(self) -> dict:
        return {
            "kind": "resonance",
            "N": self.N,
            "re_S": [z.real for z in self.S],
            "im_S": [z.imag for z in self.S],
            "abs_normalized": [abs(z) for z in self.normalized],
            "drift": self.drift,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def resonance_scan(table, N_grid: Sequence[int], beta: float = -2.0, theta: float = 0.5) -> ResonanceReport:
    """Smoothed ``S(N) = sum lambda(n) e(beta n^theta) w(n)`` with ``w`` a bump on ``[N, 2N]``.

    Reports ``S / N^(3/4)`` and its relative drift between consecutive ``N``.
    """
    Ns = [int(N) for N in N_grid]
    S = [twisted_sum(TwistSpec(table, 0.0, beta, theta, BumpWeight(float(N))), float(N)) for N in Ns]
    norm = [s / N**0.75 for s, N in zip(S, Ns)]
    drift = [abs(b - a) / abs(a) for a, b in zip(norm, norm[1:])]
    return ResonanceReport(Ns, S, norm, drift)


# ---------------------------------------------------------------------------
# general nonlinear phases


@dataclass(frozen=True)
class NonlinearPhaseSpec:
    """Phase ``g`` on ``[N, 2N]`` with size parameter ``F`` and ratio constant ``A``.

    The conditions checked are ``0 < |g'| <= B F/N < 1/100`` and
    ``F/N^2 <= |g''| <= A F/N^2``. ``B = 1`` is the literal reading; larger
    ``B`` makes the comparison constant explicit.
    """

    g: Callable
    dg: Callable
    d2g: Callable
    F: float
    A_const: float
    B: float = 1.0

    @classmethod
    def power(cls, beta: float, theta: float, N: float) -> "NonlinearPhaseSpec":
        """``g(t) = beta t^theta`` with the tightest ``F``, ``A`` and ``B`` on ``[N, 2N]``."""
        if beta == 0 or not 0 < theta < 1:
            raise PremiseError("power phase needs beta != 0 and 0 < theta < 1")
        d2_min = abs(beta) * theta * (1 - theta) * (2 * N) ** (theta - 2)
        d2_max = abs(beta) * theta * (1 - theta) * N ** (theta - 2)
        F = d2_min * N * N
        B = N * abs(beta) * theta * N ** (theta - 1) / F
        return cls(
            g=lambda t: beta * t**theta,
            dg=lambda t: beta * theta * t ** (theta - 1),
            d2g=lambda t: beta * theta * (theta - 1) * t ** (theta - 2),
            F=F,
            A_const=d2_max / d2_min,
            B=B,
        )

    def check(self, N: float, samples: int = 4001) -> None:
        t = np.linspace(N, 2 * N, samples)
        d1 = np.abs(np.asarray(self.dg(t), float))
        d2 = np.abs(np.asarray(self.d2g(t), float))
        cap = self.B * self.F / N
        if not cap < 0.01:
            raise PremiseError(f"B F/N = {cap:.3g} is not below 1/100")
        if np.any(d1 <= 0) or np.any(d1 > cap * (1 + 1e-12)):
            raise PremiseError(f"|g'| leaves (0, {cap:.3g}] on [N, 2N]")
        lo, hi = self.F / N**2, self.A_const * self.F / N**2
        if np.any(d2 < lo * (1 - 1e-12)) or np.any(d2 > hi * (1 + 1e-12)):
            raise PremiseError(f"|g''| leaves [{lo:.3g}, {hi:.3g}] on [N, 2N]")


@dataclass(frozen=True)
class BoundCheck:
    measured: float
    bound: float
    constant: float
    premise: dict

    @property
    def ratio(self) -> float:
        return self.measured / self.bound

    @property
    def holds(self) -> bool:
        return self.measured <= self.constant * self.bound


def sungeneral_check(table, phase: NonlinearPhaseSpec, N: int, alpha: float = 0.0) -> BoundCheck:
    """``S = sum_{N < n <= 2N} lambda(n) e(g(n) + alpha n)`` against ``N^(1/2)(F^(1/2) + log N)``."""
    phase.check(N)
    n = np.arange(N + 1, 2 * N + 1, dtype=np.int64)
    c = coefficient_values(table, 2 * N)[n]
    ph = 2 * np.pi * np.mod(np.mod(np.asarray(phase.g(n.astype(float)), float), 1.0) + np.mod(alpha * n, 1.0), 1.0)
    S = complex(math.fsum(c * np.cos(ph)), math.fsum(c * np.sin(ph)))
    bound = math.sqrt(N) * (math.sqrt(phase.F) + math.log(N))
    return BoundCheck(abs(S), bound, 1.0, {"F": phase.F, "A": phase.A_const, "B": phase.B})


# ---------------------------------------------------------------------------
# van der Corput checkers

#: ``|sum e(h(n))| <= cot(pi nu / 2) <= 2/(pi nu)`` (Kusmin-Landau), so 1 suffices.
VDC_FIRST_CONSTANT = 1.0
#: Explicit constant for the second-derivative test.
VDC_SECOND_CONSTANT = 3.0
#: Relative slack in sampled premise checks (absorbs finite-difference noise).
PREMISE_RTOL = 1e-6


def _exp_sum(h: Callable, a: float, b: float) -> complex:
    n = np.arange(math.floor(a) + 1, math.ceil(b), dtype=float)
    ph = 2 * np.pi * np.mod(np.asarray(h(n), float), 1.0)
    return complex(math.fsum(np.cos(ph)), math.fsum(np.sin(ph)))


def vdc_check_prop1(
    h: Callable, interval: tuple[float, float], nu: float, dh: Callable | None = None,
    samples: int = 20001, constant: float = VDC_FIRST_CONSTANT,
) -> BoundCheck:
    """First-derivative test: ``nu <= |h'| <= 1 - nu`` with ``h'`` monotone."""
    a, b = map(float, interval)
    if not 0 < nu <= 0.5:
        raise PremiseError(f"nu must lie in (0, 1/2], got {nu}")
    ph = Phase(h, dh)
    t = np.linspace(a, b, samples)
    d1 = np.asarray(ph.dh(t), float)
    tol = PREMISE_RTOL * max(1.0, float(np.max(np.abs(d1))))
    if np.any(np.abs(d1) < nu - tol) or np.any(np.abs(d1) > 1 - nu + tol):
        raise PremiseError("|h'| leaves [nu, 1 - nu]")
    steps = np.diff(d1)
    if np.any(steps > tol) and np.any(steps < -tol):
        raise PremiseError("h' is not monotone")
    return BoundCheck(abs(_exp_sum(h, a, b)), 1.0 / nu, constant, {"nu": nu})


def vdc_check_prop2(
    h: Callable, interval: tuple[float, float], Lam: float, eta: float, d2h: Callable | None = None,
    samples: int = 20001, constant: float = VDC_SECOND_CONSTANT,
) -> BoundCheck:
    """Second-derivative test: ``Lam <= |h''| <= eta Lam`` with fixed sign of ``h''``."""
    a, b = map(float, interval)
    if eta < 1:
        raise PremiseError(f"eta must be >= 1, got {eta}")
    if not Lam > 0:
        raise PremiseError(f"Lambda must be positive, got {Lam}")
    ph = Phase(h, None, d2h)
    t = np.linspace(a, b, samples)
    d2 = np.asarray(ph.d2h(t), float)
    if not (np.all(d2 > 0) or np.all(d2 < 0)):
        raise PremiseError("h'' changes sign")
    d2 = np.abs(d2)
    if np.any(d2 < Lam * (1 - PREMISE_RTOL)) or np.any(d2 > eta * Lam * (1 + PREMISE_RTOL)):
        raise PremiseError("|h''| leaves [Lambda, eta Lambda]")
    bound = eta * math.sqrt(Lam) * (b - a) + 1 / math.sqrt(Lam)
    return BoundCheck(abs(_exp_sum(h, a, b)), bound, constant, {"Lambda": Lam, "eta": eta})


# ---------------------------------------------------------------------------
# unfolding integral for the coefficients


def fourier_tail_bound(k: int, y: float, M: int) -> float:
    """Bound for ``sum_{m > M} |a(m)| e^{-2 pi m y}`` using ``|a(m)| <= d(m) m^((k-1)/2)`` and ``d(m) <= 2 sqrt(m)``."""
    total, m = 0.0, M + 1
    while True:
        log_term = math.log(2) + (k / 2) * math.log(m) - 2 * math.pi * m * y
        term = math.exp(log_term)
        total += term
        if m > (k / 2) / (2 * math.pi * y) and term < 1e-300 + 1e-40 * total:
            return total
        m += 1


def _truncation(table: EigenformTable, y: float, rel: float = 1e-20) -> int:
    """Smallest ``M`` whose tail is below ``rel`` times the largest kept term bound."""
    k = table.k
    m_peak = max(1.0, (k / 2) / (2 * math.pi * y))
    peak = 2 * m_peak ** (k / 2) * math.exp(-2 * math.pi * m_peak * y)
    M = int(m_peak) + 1
    while fourier_tail_bound(k, y, M) > rel * peak:
        M = int(M * 1.25) + 1
    return M


@dataclass(frozen=True)
class CoefficientIntegralResult:
    n: np.ndarray
    recovered: np.ndarray
    exact: np.ndarray
    residual: float
    M: int
    tail_bound: float


def coefficient_integral_check(
    table: EigenformTable, N: int, ns: Sequence[int] | None = None, y: float | None = None
) -> CoefficientIntegralResult:
    """Recover ``lambda(n)`` from ``int_{-1/2}^{1/2} n^((1-k)/2) f(x+iy) e(-n(x+iy)) dx``.

    ``f`` is the q-expansion truncated where the Deligne-type tail bound is
    negligible; the ``x`` integral is the trapezoid rule on enough nodes
    that no kept frequency aliases onto ``n``.
    """
    y = 1.0 / N if y is None else float(y)
    ns = np.arange(N, 2 * N + 1) if ns is None else np.asarray(ns, dtype=np.int64)
    M = _truncation(table, y)
    if M > table.N_max:
        raise CapacityError(f"truncation at {M} terms exceeds table length {table.N_max}")
    k = table.k
    m = np.arange(M + 1)
    coef = np.array([float(a) for a in table.a[: M + 1]]) * np.exp(-2 * np.pi * m * y)
    P = 1 << int(math.ceil(math.log2(M + int(ns.max()) + 2)))
    fx = np.fft.ifft(np.concatenate([coef, np.zeros(P - M - 1)])) * P  # f(j/P + iy)
    rec = np.empty(ns.size)
    for i, n in enumerate(ns):
        integral = np.sum(fx * np.exp(-2j * np.pi * ((n * np.arange(P)) % P) / P)) / P
        rec[i] = (integral * math.exp(2 * math.pi * n * y)).real * float(n) ** ((1 - k) / 2)
    exact = np.array([float(table.lam[n]) if n <= table.N_max else 0.0 for n in ns])
    residual = float(np.max(np.abs(rec - exact) / np.maximum(1.0, np.abs(exact))))
    tail = fourier_tail_bound(k, y, M)
    return CoefficientIntegralResult(ns, rec, exact, residual, M, tail)


def cusp_form_sup(table: EigenformTable, nx: int = 201, ny: int = 200, y_max: float = 3.0) -> tuple[float, complex]:
    """``max y^(k/2) |f(z)|`` over a grid of the standard fundamental domain and its location."""
    k = table.k
    M = min(table.N_max, 80)
    xs = np.linspace(-0.5, 0.5, nx)
    ys = np.linspace(math.sqrt(3) / 2, y_max, ny)
    X, Y = np.meshgrid(xs, ys)
    inside = X**2 + Y**2 >= 1 - 1e-12
    z = (X + 1j * Y)[inside]
    a = np.array([float(v) for v in table.a[: M + 1]])
    q = np.exp(2j * np.pi * z)
    f = np.zeros(z.size, complex)
    for mm in range(M, 0, -1):  # Horner in q
        f = (f + a[mm]) * q
    vals = z.imag ** (k / 2) * np.abs(f)
    i = int(np.argmax(vals))
    return float(vals[i]), complex(z[i])


# ---------------------------------------------------------------------------
# smooth partitions of unity


def dyadic_partition(N: int, overlap: float = 2.0) -> list[Callable[[np.ndarray], np.ndarray]]:
    """Bumps ``b(log2 y - j)`` normalized to sum to 1 on ``[1, N]``.

    Each raw bump is supported on ``|log2 y - j| < overlap/2``; the normalizer
    is the sum over every ``j`` whose bump meets ``[1/2, 2N]``.
    """
    half = overlap / 2
    js = np.arange(-1, int(math.ceil(math.log2(max(N, 2)))) + 2)

    def raw(u: np.ndarray, j: int) -> np.ndarray:
        t = (u - j) / half
        out = np.zeros_like(t)
        m = np.abs(t) < 1
        out[m] = np.exp(1 - 1 / (1 - t[m] ** 2))
        return out

    def piece(j: int):
        def phi(y):
            u = np.log2(np.asarray(y, float))
            total = sum(raw(u, int(i)) for i in js)
            return raw(u, int(j)) / total

        return phi

    return [piece(int(j)) for j in js]


def unsmoothing_check(source, N: int, alpha: float = 0.0) -> dict:
    """Compare the sharp sum with the sum of dyadic smoothed pieces.

    ``boundary`` collects the ``n > N`` contributions the partition keeps;
    ``residual`` is ``|sharp - (sum of pieces - boundary)| / |sharp|``.
    """
    pieces = dyadic_partition(N)
    n_hi = 4 * N
    c = coefficient_values(source, n_hi)
    n = np.arange(1, n_hi + 1)
    ph = 2 * np.pi * np.mod(alpha * n, 1.0)
    e = c[1:] * np.cos(ph) + 1j * c[1:] * np.sin(ph)
    smooth = [np.sum(e * p(n)) for p in pieces]
    total = complex(sum(smooth))
    cover = sum(p(n) for p in pieces)
    boundary = complex(np.sum(e[N:] * cover[N:]))
    sharp = complex(math.fsum(e[:N].real), math.fsum(e[:N].imag))
    cover_err = float(np.max(np.abs(cover[:N] - 1)))
    resid = abs(sharp - (total - boundary)) / max(abs(sharp), 1e-300)
    return {"sharp": sharp, "smooth_total": total, "boundary": boundary, "residual": resid, "cover_error": cover_err}


def divisor_counts(n_max: int) -> np.ndarray:
    return divisor_count_sieve(n_max)
