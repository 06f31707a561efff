"""Run configuration: defaults, YAML files and command-line overrides.

Schema (every key optional; unknown keys are rejected)::

    threads: 1            # MODTWIST_THREADS beats the file; --threads beats both
    seed: 0
    cache_dir: null       # coefficient cache directory
    output_dir: null      # where CSV / JSON / plot-data files go
    voronoi:   {family, k, c, d, N, theta, dt, n_max, tol_holo, tol_symsq}
    envelope:  {N, eps, A, c1, c2, c3, ceiling, slope_tol, eta}
    scan:      {family, k, n_grid, n_random, tolerance}
    nonlinear: {beta, theta, n_grid, drift_tol, drift_from, generic_beta,
                generic_thetas, generic_grid, slack}
    airy:      {at, branch_tol}
    vdc:       {trials, first_constant, second_constant}
"""

from __future__ import annotations

import dataclasses
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

THREADS_ENV = "MODTWIST_THREADS"


@dataclass
class VoronoiConfig:
    family: str = "holo"
    k: int = 12
    c: int = 5
    d: int = 3
    N: float = 1000.0
    theta: float = 0.0
    dt: float = 0.05
    n_max: int | None = None
    tol_holo: float = 1e-6
    tol_symsq: float = 1e-4


@dataclass
class EnvelopeConfig:
    N: float = 1000.0
    eps: float = 0.05
    A: float = 10.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    ceiling: float = 100.0
    slope_tol: float = 0.1
    eta: int = 0


@dataclass
class ScanConfig:
    family: str = "holo"
    k: int = 12
    n_grid: str = "2^10..2^16"
    n_random: int = 256
    tolerance: float | None = None


@dataclass
class NonlinearConfig:
    beta: float = -2.0
    theta: float = 0.5
    n_grid: str = "2^10..2^17"
    drift_tol: float = 0.05
    drift_from: int = 4096
    generic_beta: float = 1.37
    generic_thetas: list[float] = field(default_factory=lambda: [0.25, 1 / 3, 0.5, 2 / 3])
    generic_grid: str = "2^10..2^16"
    slack: float = 0.05


@dataclass
class AiryConfig:
    at: float = 10.0
    branch_tol: float = 1e-2


@dataclass
class VdcConfig:
    trials: int = 100
    first_constant: float = 1.0
    second_constant: float = 3.0


@dataclass
class RunConfig:
    threads: int = 1
    seed: int = 0
    cache_dir: str | None = None
    output_dir: str | None = None
    voronoi: VoronoiConfig = field(default_factory=VoronoiConfig)
    envelope: EnvelopeConfig = field(default_factory=EnvelopeConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    nonlinear: NonlinearConfig = field(default_factory=NonlinearConfig)
    airy: AiryConfig = field(default_factory=AiryConfig)
    vdc: VdcConfig = field(default_factory=VdcConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _merge(obj, data: dict, where: str):
    names = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        if key not in names:
            raise ValueError(f"unknown config key {where}{key!r}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ValueError(f"config section {where}{key} must be a mapping")
            _merge(current, value, f"{where}{key}.")
        else:
            setattr(obj, key, value)


def load_config(path: str | os.PathLike | None = None, env: dict | None = None) -> RunConfig:
    """Defaults, then the YAML file, then the environment thread count."""
    cfg = RunConfig()
    if path is not None:
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise ValueError("config file must hold a mapping")
        _merge(cfg, data, "")
    env = os.environ if env is None else env
    if env.get(THREADS_ENV):
        cfg.threads = int(env[THREADS_ENV])
    return cfg


def apply_overrides(cfg: RunConfig, section: str | None, overrides: dict) -> RunConfig:
    """Set non-``None`` values; keys land in ``section`` unless they are top level."""
    top = {f.name for f in dataclasses.fields(cfg)}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in top and not dataclasses.is_dataclass(getattr(cfg, key)):
            setattr(cfg, key, value)
        elif section is not None:
            _merge(getattr(cfg, section), {key: value}, f"{section}.")
        else:
            raise ValueError(f"no section for override {key!r}")
    return cfg


_POW = re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*$")


def _int_term(s: str) -> int:
    m = _POW.match(s)
    return int(m.group(1)) ** int(m.group(2)) if m else int(s)


def parse_n_grid(spec: str | list) -> list[int]:
    """``"2^10..2^16"`` (powers of the base), ``"1000,2000,4000"`` or a list."""
    if isinstance(spec, (list, tuple)):
        return [int(v) for v in spec]
    spec = str(spec).strip()
    if ".." in spec:
        lo, hi = (p.strip() for p in spec.split(".."))
        m_lo, m_hi = _POW.match(lo), _POW.match(hi)
        if m_lo and m_hi and m_lo.group(1) == m_hi.group(1):
            b = int(m_lo.group(1))
            return [b**e for e in range(int(m_lo.group(2)), int(m_hi.group(2)) + 1)]
        a, z = _int_term(lo), _int_term(hi)
        out = [a]
        while out[-1] * 2 <= z:
            out.append(out[-1] * 2)
        return out
    return [_int_term(p) for p in spec.split(",") if p.strip()]
