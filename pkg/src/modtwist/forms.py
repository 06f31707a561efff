"""Exact Fourier coefficients of level-1 eigenforms and their symmetric squares.

Every weight in :data:`SUPPORTED_WEIGHTS` has a one-dimensional cusp space,
so the normalized eigenform is ``Delta * E_{k-12}``.  Series products are done
exactly with Kronecker substitution on big integers (gmpy2 when available).
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import bernoulli, divisors, factorize, moebius
from pathlib import Path

from .exceptions import CapacityError, FormatError, UnsupportedWeightError

try:  # pragma: no cover - exercised implicitly
    import gmpy2

    def _bigint(x: int):
        return gmpy2.mpz(x)

except ImportError:  # pragma: no cover
    gmpy2 = None

    def _bigint(x: int):
        return x


SUPPORTED_WEIGHTS = (12, 16, 18, 20, 22, 26)

# E_{k-12} as a product of E4 and E6
_EISENSTEIN_FACTORS = {0: (0, 0), 4: (1, 0), 6: (0, 1), 8: (2, 0), 10: (1, 1), 14: (2, 1)}


# ---------------------------------------------------------------------------
# exact power series


def _pack(coeffs: list[int], width: int):
    nbytes = width // 8
    blob = b"".join(int(c).to_bytes(nbytes, "little") for c in coeffs)
    return _bigint(int.from_bytes(blob, "little"))


def _unpack(value, width: int, count: int) -> list[int]:
    nbytes = width // 8
    value = int(value)
    blob = value.to_bytes(max((value.bit_length() + 7) // 8, nbytes * count), "little")
    return [int.from_bytes(blob[i * nbytes : (i + 1) * nbytes], "little") for i in range(count)]


def _mul_nonneg(a: list[int], b: list[int], n: int) -> list[int]:
    """Product of two nonnegative series, truncated to ``n`` terms."""
    a, b = a[:n], b[:n]
    if not any(a) or not any(b):
        return [0] * n
    bits = max(a).bit_length() + max(b).bit_length() + min(len(a), len(b)).bit_length() + 1
    width = -(-bits // 64) * 64
    prod = _pack(a, width) * _pack(b, width)
    out = _unpack(prod, width, n)
    return out


def _split(a: list[int]) -> tuple[list[int], list[int]]:
    return [x if x > 0 else 0 for x in a], [-x if x < 0 else 0 for x in a]


def series_mul(a: list[int], b: list[int], n: int) -> list[int]:
    """Exact product of integer power series truncated to ``n`` terms."""
    ap, am = _split(a)
    bp, bm = _split(b)
    pos = [x + y for x, y in zip(_mul_nonneg(ap, bp, n), _mul_nonneg(am, bm, n))]
    neg = [x + y for x, y in zip(_mul_nonneg(ap, bm, n), _mul_nonneg(am, bp, n))]
    return [x - y for x, y in zip(pos, neg)]


def divisor_power_sums(power: int, n: int) -> list[int]:
    """``sigma_power(m)`` for ``0 <= m < n`` (entry 0 is 0)."""
    out = [0] * n
    for d in range(1, n):
        dp = d**power
        for m in range(d, n, d):
            out[m] += dp
    return out


def eisenstein_series(k: int, n: int) -> list[int]:
    """``E_k = 1 - (2k/B_k) sum sigma_{k-1}(m) q^m`` (integral for k = 4, 6)."""
    const = Fraction(-2 * k) / bernoulli(k)
    if const.denominator != 1:
        raise ValueError(f"E_{k} does not have integral coefficients")
    c = int(const)
    sig = divisor_power_sums(k - 1, n)
    out = [c * s for s in sig]
    out[0] = 1
    return out


def delta_series(n: int) -> list[int]:
    """Coefficients of ``Delta = (E4^3 - E6^2)/1728`` for ``q^0 .. q^(n-1)``."""
    e4 = eisenstein_series(4, n)
    e6 = eisenstein_series(6, n)
    e4sq = series_mul(e4, e4, n)
    num = [x - y for x, y in zip(series_mul(e4sq, e4, n), series_mul(e6, e6, n))]
    out = []
    for x in num:
        q, r = divmod(x, 1728)
        if r:
            raise ArithmeticError("Delta expansion is not integral")
        out.append(q)
    return out


def eigenform_series(k: int, n: int) -> list[int]:
    """q-expansion ``a(0..n-1)`` of the normalized weight-``k`` eigenform."""
    if k not in SUPPORTED_WEIGHTS:
        raise UnsupportedWeightError(
            f"weight {k} unsupported; choose one of {SUPPORTED_WEIGHTS}"
        )
    f = delta_series(n)
    e4_pow, e6_pow = _EISENSTEIN_FACTORS[k - 12]
    if e4_pow:
        e4 = eisenstein_series(4, n)
        for _ in range(e4_pow):
            f = series_mul(f, e4, n)
    if e6_pow:
        f = series_mul(f, eisenstein_series(6, n), n)
    return f


# ---------------------------------------------------------------------------
# tables


def normalize_coefficient(a: int, n: int, k: int) -> float:
    """``a / n^((k-1)/2)`` rounded from the exact rational ``a^2 / n^(k-1)``."""
    if a == 0:
        return 0.0
    mag = math.sqrt(a * a / n ** (k - 1))
    return mag if a > 0 else -mag


@dataclass(frozen=True, eq=False)
class EigenformTable:
    """Exact coefficients ``a(1..N_max)`` and normalized ``lambda(n)`` of a weight-``k`` eigenform.

    ``a[0]`` and ``lam[0]`` are placeholders (0) so that indices equal ``n``.
    """

    k: int
    a: tuple[int, ...]
    lam: np.ndarray
    N_max: int
    _ext: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def conductor(self) -> int:
        return self.k * self.k

    def lambda_at(self, n: int) -> float:
        """``lambda(n)``, extended past ``N_max`` by Hecke multiplicativity.

        Beyond the table every prime factor of ``n`` must itself be ``<= N_max``.
        """
        if n <= self.N_max:
            return float(self.lam[n])
        if n in self._ext:
            return self._ext[n]
        val = 1.0
        for p, e in factorize(n).items():
            if p > self.N_max:
                raise CapacityError(f"prime {p} exceeds table length {self.N_max}")
            val *= self._prime_power(p, e)
        self._ext[n] = val
        return val

    def _prime_power(self, p: int, e: int) -> float:
        key = (p, e)
        if key in self._ext:
            return self._ext[key]
        lp = float(self.lam[p])
        prev, cur = 1.0, lp
        for _ in range(e - 1):
            prev, cur = cur, lp * cur - prev
        val = cur if e else 1.0
        self._ext[key] = val
        return val

    def lambda_squares(self, m_max: int) -> np.ndarray:
        """``lambda(m^2)`` for ``0 <= m <= m_max`` via prime-power recursion."""
        if m_max > self.N_max:
            raise CapacityError(f"need primes up to {m_max}, table stops at {self.N_max}")
        spf = smallest_prime_factor(m_max)
        out = np.zeros(m_max + 1)
        if m_max >= 1:
            out[1] = 1.0
        for m in range(2, m_max + 1):
            p = int(spf[m])
            rest, e = m // p, 1
            while rest % p == 0:
                rest //= p
                e += 1
            out[m] = self._prime_power(p, 2 * e) * out[rest]
        return out


def smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if spf[p] == 0:
            spf[p::p] = np.where(spf[p::p] == 0, p, spf[p::p])
    return spf


def build_eigenform(k: int, N_max: int) -> EigenformTable:
    """Exact eigenform table of weight ``k`` up to ``N_max``."""
    if N_max < 1:
        raise ValueError(f"N_max must be >= 1, got {N_max}")
    coeffs = eigenform_series(k, N_max + 1)
    coeffs[0] = 0
    lam = np.array([normalize_coefficient(c, n, k) if n else 0.0 for n, c in enumerate(coeffs)])
    lam.setflags(write=False)
    return EigenformTable(k=k, a=tuple(coeffs), lam=lam, N_max=N_max)


class SymSquareTable:
    """GL(3) coefficients of the symmetric-square lift of an eigenform.

    ``A1[n] = A_F(1, n) = sum over m l^2 = n of lambda(m^2)``; the general
    ``A_F(m, n)`` comes from the self-dual Hecke relation and is memoized.
    """

    def __init__(self, base: EigenformTable, N_max: int | None = None):
        self.base = base
        self.N_max = base.N_max if N_max is None else int(N_max)
        lam_sq = base.lambda_squares(self.N_max)
        A1 = np.zeros(self.N_max + 1)
        l = 1
        while l * l <= self.N_max:
            ll = l * l
            A1[ll::ll] += lam_sq[1 : self.N_max // ll + 1]
            l += 1
        A1.setflags(write=False)
        self.A1 = A1
        self._cache: dict[tuple[int, int], float] = {}

    @property
    def k(self) -> int:
        return self.base.k

    def A(self, m: int, n: int) -> float:
        """``A_F(m, n)`` with ``A_F(m, 1) = A_F(1, m)``."""
        if m > self.N_max or n > self.N_max:
            raise CapacityError(f"A({m}, {n}) beyond table length {self.N_max}")
        if m == 1:
            return float(self.A1[n])
        if n == 1:
            return float(self.A1[m])
        key = (m, n)
        if key not in self._cache:
            g = math.gcd(m, n)
            self._cache[key] = sum(
                moebius(d) * self.A1[m // d] * self.A1[n // d] for d in divisors(g)
            )
        return self._cache[key]

    def A_row(self, n: int, m_max: int) -> np.ndarray:
        """``A_F(m, n)`` for ``m = 0..m_max`` (entry 0 is zero)."""
        if m_max > self.N_max or n > self.N_max:
            raise CapacityError(f"A(., {n}) up to {m_max} beyond table length {self.N_max}")
        out = np.zeros(m_max + 1)
        for d in divisors(n):
            mu = moebius(d)
            if mu:
                out[d::d] += mu * self.A1[n // d] * self.A1[1 : m_max // d + 1]
        return out


def sym_square(base: EigenformTable, N_max: int | None = None) -> SymSquareTable:
    return SymSquareTable(base, N_max)


# ---------------------------------------------------------------------------
# on-disk cache

MAGIC = b"VFRG1"
_HEADER = struct.Struct("<5sIQ")


def save_table(table: EigenformTable, path) -> None:
    """Write ``table`` in the binary cache layout.

    Header ``magic, k (u32), N_max (u64)``; then for ``n = 1..N_max`` a u32 byte
    length, the little-endian magnitude of ``a(n)`` and a sign byte (1 if
    negative); then ``lambda(1..N_max)`` as little-endian float64.
    """
    parts = [_HEADER.pack(MAGIC, table.k, table.N_max)]
    for a in table.a[1:]:
        a = int(a)
        mag = abs(a).to_bytes((abs(a).bit_length() + 7) // 8, "little")
        parts.append(struct.pack("<I", len(mag)) + mag + (b"\x01" if a < 0 else b"\x00"))
    parts.append(np.asarray(table.lam[1:], dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_table(path, k: int | None = None, N_max: int | None = None) -> EigenformTable:
    """Read a cache file, checking weight and that at least ``N_max`` terms exist.

    The returned table is truncated to ``N_max`` when given.
    """
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError("truncated header")
    magic, wk, n_file = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if wk not in SUPPORTED_WEIGHTS:
        raise FormatError(f"weight {wk} in file is not supported")
    if k is not None and wk != k:
        raise FormatError(f"file holds weight {wk}, requested {k}")
    if N_max is not None and N_max > n_file:
        raise CapacityError(f"file holds {n_file} coefficients, requested {N_max}")
    pos = _HEADER.size
    a = [0]
    try:
        for _ in range(n_file):
            (length,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            if pos + length + 1 > len(blob):
                raise FormatError("truncated coefficient block")
            mag = int.from_bytes(blob[pos : pos + length], "little")
            sign = blob[pos + length]
            if sign > 1:
                raise FormatError(f"bad sign byte {sign}")
            a.append(-mag if sign else mag)
            pos += length + 1
    except struct.error as exc:
        raise FormatError("truncated coefficient block") from exc
    if len(blob) - pos != 8 * n_file:
        raise FormatError(f"expected {8 * n_file} bytes of lambda values, found {len(blob) - pos}")
    lam = np.concatenate([[0.0], np.frombuffer(blob, dtype="<f8", offset=pos).astype(float)])
    n = n_file if N_max is None else N_max
    lam = lam[: n + 1].copy()
    lam.setflags(write=False)
    return EigenformTable(k=wk, a=tuple(a[: n + 1]), lam=lam, N_max=n)


def write_csv(table: EigenformTable, path) -> None:
    """Human-readable export with columns ``n, a(n), lambda(n)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "a(n)", "lambda(n)"])
        for n in range(1, table.N_max + 1):
            w.writerow([n, str(int(table.a[n])), repr(float(table.lam[n]))])


def cached_eigenform(k: int, N_max: int, cache_dir=None) -> EigenformTable:
    """``build_eigenform`` backed by a cache file ``eigenform_k{k}.vfrg`` in ``cache_dir``."""
    if cache_dir is None:
        return build_eigenform(k, N_max)
    path = Path(cache_dir) / f"eigenform_k{k}.vfrg"
    if path.exists():
        try:
            return load_table(path, k=k, N_max=N_max)
        except CapacityError:
            pass
    table = build_eigenform(k, N_max)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_table(table, path)
    return table
