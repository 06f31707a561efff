"""Exact integer arithmetic: divisor functions, Kloosterman sums, rational approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import CapacityError, NoInverseError

#: Largest modulus accepted by :func:`kloosterman`.
MAX_KLOOSTERMAN_MODULUS = 10**8


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of ``n >= 1`` by trial division."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            while n % q == 0:
                out[q] = out.get(q, 0) + 1
                n //= q
        p += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for e in factorize(n).values())


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    r = n
    for p in factorize(n):
        r -= r // p
    return r


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**j for d in ds for j in range(e + 1)]
    return sorted(ds)


def mod_inverse(d: int, c: int) -> int:
    """Inverse of ``d`` modulo ``c`` in ``[0, c)``."""
    if c < 1:
        raise ValueError(f"modulus must be >= 1, got {c}")
    if math.gcd(d, c) != 1:
        raise NoInverseError(f"{d} has no inverse modulo {c}")
    return pow(d, -1, c) if c > 1 else 0


def divisor_count_sieve(n_max: int) -> np.ndarray:
    """``d(n)`` for ``0 <= n <= n_max`` (entry 0 is 0)."""
    d = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(1, n_max + 1):
        d[i::i] += 1
    return d


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.array([], dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


# ---------------------------------------------------------------------------
# Kloosterman sums


@dataclass(frozen=True)
class KloostermanValue:
    value: float
    a: int
    b: int
    c: int
    imag_residual: float = 0.0

    def weil_bound(self) -> float:
        g = math.gcd(math.gcd(self.a, self.b), self.c)
        return divisor_count(self.c) * math.sqrt(g) * math.sqrt(self.c)

    def __float__(self) -> float:
        return self.value


def _inverse_table(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Units mod ``c`` and their inverses, by vectorized extended Euclid."""
    x = np.arange(c, dtype=np.int64)
    r0 = np.full(c, c, dtype=np.int64)
    r1 = x.copy()
    s0 = np.zeros(c, dtype=np.int64)
    s1 = np.ones(c, dtype=np.int64)
    while np.any(r1 != 0):
        live = r1 != 0
        q = np.zeros(c, dtype=np.int64)
        q[live] = r0[live] // r1[live]
        r0, r1 = np.where(live, r1, r0), np.where(live, r0 - q * r1, r1)
        s0, s1 = np.where(live, s1, s0), np.where(live, s0 - q * s1, s1)
    units = r0 == 1
    return x[units], np.mod(s0[units], c)


def kloosterman(a: int, b: int, c: int) -> KloostermanValue:
    r"""S(a, b; c) = sum over units x mod c of e((a x + b \bar x)/c)."""
    if c < 1:
        raise ValueError(f"modulus must be >= 1, got {c}")
    if c > MAX_KLOOSTERMAN_MODULUS:
        raise CapacityError(f"modulus {c} exceeds {MAX_KLOOSTERMAN_MODULUS}")
    if c == 1:
        return KloostermanValue(1.0, a, b, c)
    x, xbar = _inverse_table(c)
    r = (a % c * x + b % c * xbar) % c
    angle = 2.0 * np.pi * r / c
    re = math.fsum(np.cos(angle))
    im = math.fsum(np.sin(angle))
    return KloostermanValue(re, a, b, c, imag_residual=abs(im))


def kloosterman_table(a: int, c: int, residues) -> np.ndarray:
    """S(a, b; c) for every b in ``residues``, sharing one inverse table."""
    residues = np.asarray(residues, dtype=np.int64)
    if c == 1:
        return np.ones(residues.shape)
    x, xbar = _inverse_table(c)
    keys, inv = np.unique(residues % c, return_inverse=True)
    vals = np.empty(keys.size)
    for i, b in enumerate(keys):
        angle = 2.0 * np.pi * ((a % c * x + int(b) * xbar) % c) / c
        vals[i] = math.fsum(np.cos(angle))
    return vals[inv].reshape(residues.shape)


# ---------------------------------------------------------------------------
# Dirichlet approximation


@dataclass(frozen=True)
class RationalApprox:
    """``alpha = a/q + theta/(2 pi)`` with ``1 <= q <= Q`` and ``|theta/2pi| <= 1/(qQ)``."""

    a: int
    q: int
    theta: float
    Q: float
    alpha: float

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.a, self.q)


def _convergents(x: Fraction):
    p0, q0, p1, q1 = 0, 1, 1, 0
    while True:
        a = math.floor(x)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        yield p1, q1
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def dirichlet_approx(alpha: float, Q: float) -> RationalApprox:
    """Best continued-fraction convergent ``a/q`` of ``alpha`` with ``q <= Q``.

    If ``p_n/q_n`` is the last convergent with ``q_n <= Q`` then
    ``|alpha - p_n/q_n| < 1/(q_n q_{n+1}) <= 1/(q_n Q)``.
    """
    if not Q >= 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    x = Fraction(alpha)
    a, q = math.floor(x), 1
    for p_n, q_n in _convergents(x):
        if q_n > Q:
            break
        a, q = p_n, q_n
    theta = 2.0 * math.pi * float(x - Fraction(a, q))
    return RationalApprox(a=a, q=q, theta=theta, Q=float(Q), alpha=float(alpha))


@lru_cache(maxsize=None)
def bernoulli(m: int) -> Fraction:
    """Bernoulli number ``B_m`` with ``B_1 = -1/2`` (Akiyama-Tanigawa)."""
    A = [Fraction(0)] * (m + 1)
    for j in range(m + 1):
        A[j] = Fraction(1, j + 1)
        for i in range(j, 0, -1):
            A[i - 1] = i * (A[i - 1] - A[i])
    return A[0] if m != 1 else Fraction(-1, 2)


def bernoulli_poly(m: int, x: float) -> float:
    """Bernoulli polynomial ``B_m(x)``."""
    return float(sum(math.comb(m, j) * bernoulli(j) * Fraction(x) ** (m - j) for j in range(m + 1)))
