"""Command-line front end: ``modtwist <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .experiments import airy_checks, vdc_trials
from .forms import cached_eigenform, save_table, sym_square, write_csv
from .special import BumpWeight
from .sums import (
    NonlinearPhaseSpec,
    resonance_scan,
    sun_exponent_scan,
    exponent_scan,
    sungeneral_check,
)
from .exceptions import ModTwistError, PremiseError
from .voronoi import EnvelopeConstants, envelope_validation, voronoi_identity_residual

SCAN_TOLERANCES = {"holo": (None, 0.6), "symsq": (None, 0.85), "ones": (0.98, 1.02), "random": (0.45, 0.55)}


def _num(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


class Run:
    """Collects checks and artifacts of one subcommand."""

    def __init__(self, command: str, cfg: cfgmod.RunConfig):
        self.command = command
        self.cfg = cfg
        self.checks: list[dict] = []
        self.summary: dict = {}
        self.files: dict[str, str] = {}

    def check(self, name: str, value: float, ok: bool, tolerance) -> None:
        self.checks.append({"check": name, "value": _num(value), "tolerance": tolerance, "passed": bool(ok)})

    @property
    def failures(self) -> list[dict]:
        return [c for c in self.checks if not c["passed"]]

    def finish(self) -> int:
        doc = {"command": self.command, "checks": self.checks, "summary": self.summary}
        text = json.dumps(doc, indent=2, sort_keys=True, default=_num)
        print(text)
        out = self.cfg.output_dir
        if out:
            d = Path(out)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"{self.command}.json").write_text(text + "\n")
            for name, body in self.files.items():
                (d / name).write_text(body)
        if self.failures:
            print(json.dumps({"command": self.command, "failures": self.failures}, sort_keys=True, default=_num),
                  file=sys.stderr)
            return 1
        return 0


# ---------------------------------------------------------------------------
# subcommands


def cmd_coeffs(args, cfg) -> int:
    table = cached_eigenform(args.k, args.nmax, cfg.cache_dir)
    if args.format == "binary":
        if not args.output:
            raise SystemExit("--format binary needs --output")
        save_table(table, args.output)
        return 0
    if args.output:
        write_csv(table, args.output)
        return 0
    sys.stdout.write("n,a(n),lambda(n)\n")
    for n in range(1, table.N_max + 1):
        sys.stdout.write(f"{n},{int(table.a[n])},{float(table.lam[n])!r}\n")
    return 0


def cmd_voronoi(args, cfg) -> int:
    v = cfg.voronoi
    run = Run("voronoi-check", cfg)
    weight = BumpWeight(float(v.N))
    if v.family == "holo":
        n_max = v.n_max or max(4000, int(4 * v.N))
        table = cached_eigenform(v.k, n_max, cfg.cache_dir)
        tol = v.tol_holo
    elif v.family == "symsq":
        n_max = v.n_max or 40000
        table = sym_square(cached_eigenform(v.k, n_max, cfg.cache_dir))
        tol = v.tol_symsq
    else:
        raise SystemExit(f"voronoi-check supports holo and symsq, not {v.family!r}")
    res = voronoi_identity_residual(v.family, table, v.d, v.c, weight, theta=v.theta, target=tol, dt=v.dt)
    print(f"residual {res.residual:.3e} (tolerance {tol:g}, {res.n_terms} dual terms)", file=sys.stderr)
    run.check("identity residual", res.residual, res.residual <= tol, tol)
    run.summary = {
        "family": v.family, "k": v.k, "c": v.c, "d": v.d, "N": v.N, "theta": v.theta,
        "lhs": _num(res.lhs), "rhs": _num(res.rhs), "residual": res.residual, "n_terms": res.n_terms,
        "truncation_change": res.truncation_change, "orientation": res.orientation,
        "history": [[n, r] for n, r in res.history],
    }
    return run.finish()


def cmd_envelope(args, cfg) -> int:
    e = cfg.envelope
    run = Run("bound-envelope", cfg)
    const = EnvelopeConstants(eps=e.eps, A=e.A, c1=e.c1, c2=e.c2, c3=e.c3)
    families = ["holo", "maass", "symsq"] if args.family == "all" else [args.family]
    for fam in families:
        rep = envelope_validation(fam, N=float(e.N), eta=e.eta, constants=const, ceiling=e.ceiling)
        run.check(f"{fam}: C <= ceiling", rep.C, rep.C <= e.ceiling, e.ceiling)
        run.check(f"{fam}: slope of log C in log k", rep.slope, rep.slope <= e.slope_tol, e.slope_tol)
        run.check(f"{fam}: regime misclassifications", rep.misclassified, rep.misclassified == 0, 0)
        run.summary[fam] = {"C": rep.C, "slope": rep.slope, "points": len(rep.rows),
                            "per_k": {str(k): v for k, v in sorted(rep.per_k.items())}}
        run.files[f"envelope_{fam}.csv"] = rep.to_csv()
        psi = "".join(f"{r['x']!r} {abs(complex(r['re_psi'], r['im_psi']))!r}\n" for r in rep.rows)
        env = "".join(f"{r['x']!r} {r['M'] + r['E']!r}\n" for r in rep.rows)
        run.files[f"envelope_{fam}_psi.dat"] = psi
        run.files[f"envelope_{fam}_bound.dat"] = env
    return run.finish()


def cmd_scan(args, cfg) -> int:
    s = cfg.scan
    run = Run("scan", cfg)
    grid = cfgmod.parse_n_grid(s.n_grid)
    table = None
    if s.family in ("holo", "symsq"):
        table = cached_eigenform(s.k, max(grid), cfg.cache_dir)
        if s.family == "symsq":
            table = sym_square(table)
    rep = exponent_scan(s.family, grid, s.k, table=table, n_random=s.n_random, seed=cfg.seed, threads=cfg.threads)
    lo, hi = SCAN_TOLERANCES.get(s.family, (None, None))
    if s.tolerance is not None:
        lo, hi = None, s.tolerance
    if hi is not None:
        ok = rep.slope <= hi and (lo is None or rep.slope >= lo)
        run.check("fitted slope", rep.slope, ok, [lo, hi] if lo is not None else hi)
    run.summary = rep.summary()
    run.files["scan.csv"] = rep.to_csv()
    run.files["scan.dat"] = rep.plot_data()
    return run.finish()


def cmd_nonlinear(args, cfg) -> int:
    nl = cfg.nonlinear
    run = Run("nonlinear", cfg)
    res_grid = cfgmod.parse_n_grid(nl.n_grid)
    gen_grid = cfgmod.parse_n_grid(nl.generic_grid)
    table = cached_eigenform(args.k, max(2 * max(res_grid) + 2, max(gen_grid) * 2), cfg.cache_dir)

    res = resonance_scan(table, res_grid, nl.beta, nl.theta)
    late = [d for N, d in zip(res.N, res.drift) if N >= nl.drift_from]
    worst = max(late) if late else 0.0
    run.check(f"resonance drift for N >= {nl.drift_from}", worst, worst <= nl.drift_tol, nl.drift_tol)
    run.summary["resonance"] = res.summary()
    run.files["resonance.dat"] = "".join(f"{N} {abs(z)!r}\n" for N, z in zip(res.N, res.normalized))

    run.summary["generic"] = {}
    for th in nl.generic_thetas:
        rep = sun_exponent_scan(table, gen_grid, nl.generic_beta, th, seed=cfg.seed, threads=cfg.threads)
        tol = 0.5 + th / 2 + nl.slack
        run.check(f"generic slope theta={th:.4g}", rep.slope, rep.slope <= tol, tol)
        run.summary["generic"][f"{th:.6g}"] = rep.summary()
        run.files[f"nonlinear_theta{th:.4g}.dat"] = rep.plot_data()

    general = []
    for N in gen_grid:
        for th in nl.generic_thetas:
            try:
                ph = NonlinearPhaseSpec.power(nl.generic_beta, th, N)
                chk = sungeneral_check(table, ph, N)
                general.append({"N": N, "theta": th, "measured": chk.measured, "bound": chk.bound,
                                "ratio": chk.ratio, **chk.premise})
            except PremiseError as exc:
                general.append({"N": N, "theta": th, "skipped": str(exc)})
    run.summary["general_phase"] = general
    ratios = [g["ratio"] for g in general if "ratio" in g]
    if ratios:
        run.check("general phase bound (max measured/bound)", max(ratios), max(ratios) <= 1.0, 1.0)
    return run.finish()


def cmd_airy(args, cfg) -> int:
    run = Run("airy", cfg)
    for c in airy_checks(cfg.airy.at, cfg.airy.branch_tol):
        run.check(c.name, c.value, c.passed, c.tolerance)
        if c.detail:
            run.summary[c.name] = c.detail
    return run.finish()


def cmd_vdc(args, cfg) -> int:
    v = cfg.vdc
    run = Run("vdc", cfg)
    rep = vdc_trials(v.trials, cfg.seed, first_constant=v.first_constant, second_constant=v.second_constant)
    run.check("first-derivative violations", rep["prop1_violations"], rep["prop1_violations"] == 0, 0)
    run.check("second-derivative violations", rep["prop2_violations"], rep["prop2_violations"] == 0, 0)
    run.summary = rep
    return run.finish()


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--threads", type=int, help=f"worker threads (overrides ${cfgmod.THREADS_ENV})")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", dest="output_dir", help="directory for CSV, JSON and plot-data files")
    common.add_argument("--cache-dir", dest="cache_dir", help="coefficient cache directory")

    p = argparse.ArgumentParser(prog="modtwist", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", parents=[common], help="build or export eigenform coefficients")
    c.add_argument("--k", type=int, default=12)
    c.add_argument("--nmax", type=int, required=True)
    c.add_argument("--format", choices=("csv", "binary"), default="csv")
    c.add_argument("--output")
    c.set_defaults(func=cmd_coeffs, section=None)

    v = sub.add_parser("voronoi-check", parents=[common], help="Voronoi identity residuals")
    v.add_argument("--family", choices=("holo", "symsq"))
    v.add_argument("--k", type=int)
    v.add_argument("--c", type=int)
    v.add_argument("--d", type=int)
    v.add_argument("--N", type=float)
    v.add_argument("--theta", type=float)
    v.add_argument("--dt", type=float)
    v.add_argument("--n-max", dest="n_max", type=int)
    v.set_defaults(func=cmd_voronoi, section="voronoi")

    e = sub.add_parser("bound-envelope", parents=[common], help="envelope validation grids")
    e.add_argument("--family", choices=("holo", "maass", "symsq", "all"), default="all")
    e.add_argument("--N", type=float)
    e.add_argument("--eps", type=float)
    e.add_argument("--A", type=float)
    e.add_argument("--ceiling", type=float)
    e.set_defaults(func=cmd_envelope, section="envelope")

    s = sub.add_parser("scan", parents=[common], help="exponent scans of twisted sums")
    s.add_argument("--family", choices=("holo", "symsq", "ones", "random", "maass-synthetic"))
    s.add_argument("--k", type=int)
    s.add_argument("--n-grid", dest="n_grid")
    s.add_argument("--n-random", dest="n_random", type=int)
    s.add_argument("--tolerance", type=float)
    s.set_defaults(func=cmd_scan, section="scan")

    n = sub.add_parser("nonlinear", parents=[common], help="resonance and nonlinear-phase scans")
    n.add_argument("--k", type=int, default=12)
    n.add_argument("--n-grid", dest="n_grid")
    n.add_argument("--generic-grid", dest="generic_grid")
    n.set_defaults(func=cmd_nonlinear, section="nonlinear")

    a = sub.add_parser("airy", parents=[common], help="Airy function checks")
    a.add_argument("--at", type=float)
    a.set_defaults(func=cmd_airy, section="airy")

    d = sub.add_parser("vdc", parents=[common], help="van der Corput bound checks")
    d.add_argument("--trials", type=int)
    d.set_defaults(func=cmd_vdc, section="vdc")
    return p


_GLOBAL = ("config", "threads", "seed", "output_dir", "cache_dir")
_LOCAL_ONLY = {"coeffs": ("k", "nmax", "format", "output"), "nonlinear": ("k",)}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
        cfgmod.apply_overrides(cfg, None, {k: getattr(args, k) for k in _GLOBAL if k != "config"})
        skip = set(_GLOBAL) | set(_LOCAL_ONLY.get(args.command, ())) | {"command", "func", "section", "family"}
        local = {k: v for k, v in vars(args).items() if k not in skip}
        if args.section is not None:
            if args.command != "bound-envelope":
                local["family"] = getattr(args, "family", None)
            cfgmod.apply_overrides(cfg, args.section, local)
        return args.func(args, cfg)
    except (ModTwistError, ValueError) as exc:
        print(json.dumps({"command": args.command, "failures": [{"error": type(exc).__name__, "message": str(exc)}]}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
