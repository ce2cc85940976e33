"""Command-line front end.

Exit codes: 0 all checks within tolerance, 1 some check out of tolerance,
2 configuration error.  Every run with --out also writes <out>.manifest.json
(config echo, versions, seed, wall time); the CSV/JSON result files carry no
timestamps, so identical configs reproduce them byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .numcore import DomainError, SeedSpec, dumps_canonical

DEFAULT_H_PANEL = (0.6, 0.75, 0.9)
XI_PANELS = {
    "default": (
        ("bump_a", ((1.0, 0.3, 0.25),)),
        ("bump_b", ((1.5, 0.7, 0.15),)),
        ("bump_c", ((0.8, -0.2, 0.4), (0.5, 0.5, 0.2))),
    ),
    "single": (("bump_a", ((1.0, 0.3, 0.25),)),),
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    H: list = field(default_factory=list)
    seed: int = 20240601
    tolerances: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"

    def validate(self):
        for H in self.H:
            if not 0.5 < H < 1:
                raise ConfigError(f"H = {H} is outside (1/2, 1)")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")


# -- helpers -----------------------------------------------------------------------

def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str, started: float, extra: dict | None = None):
    if cfg.out:
        Path(cfg.out).write_text(text)
        manifest = {
            "config": asdict(cfg),
            "versions": {"rosenblatt": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "python": platform.python_version()},
            "seed": cfg.seed,
            "wall_time_s": round(time.time() - started, 3),
        }
        if extra:
            manifest["summary"] = extra
        Path(cfg.out + ".manifest.json").write_text(dumps_canonical(manifest))
    else:
        sys.stdout.write(text)


def xi_panel(name: str):
    from .fracint import SmoothTestFunction
    if name not in XI_PANELS:
        raise ConfigError(f"unknown ξ panel {name!r}; choose from {sorted(XI_PANELS)}")
    return [(label, SmoothTestFunction.from_terms(terms)) for label, terms in XI_PANELS[name]]


def _spectrum(H: float, cells: int, keep: int):
    from .spectral import nystrom_eig
    return nystrom_eig(H, cells, keep)


# -- subcommands -----------------------------------------------------------------------

def cmd_cumulants(args, cfg: RunConfig, started: float) -> int:
    from .moments import cumulant_table
    rows = []
    for H in cfg.H:
        spec = _spectrum(H, cfg.grid["cells"], cfg.grid["keep"]) if args.max_order > 4 else None
        for r in cumulant_table(H, args.max_order, args.method, spec):
            rows.append((H, r["r"], r["kappa_r"], r["route"], r["error"]))
    _emit(cfg, _csv_text(["H", "r", "kappa_r", "route", "error"], rows), started)
    return 0


def cmd_spectrum(args, cfg: RunConfig, started: float) -> int:
    from .spectral import power_sum
    rows, summary = [], {}
    for H in cfg.H:
        spec = _spectrum(H, cfg.grid["cells"], cfg.grid["keep"])
        for n, lam in enumerate(spec.lambdas, 1):
            rows.append((H, n, lam, int(n <= spec.n_trust)))
        ps = power_sum(spec, 2)
        summary[str(H)] = {"sum_lambda_sq": ps.value, "tail": ps.tail_estimate, "n_trust": spec.n_trust,
                           "widom_delta": spec.widom_delta}
    _emit(cfg, _csv_text(["H", "n", "lambda", "trusted"], rows), started, summary)
    tol = cfg.tolerances["sum_lambda_sq"]
    return 0 if all(abs(v["sum_lambda_sq"] - 0.5) < tol for v in summary.values()) else 1


def cmd_charfn(args, cfg: RunConfig, started: float) -> int:
    from .charfn import cf_eigprod, logcf_series, series_radius
    rows, worst = [], 0.0
    for H in cfg.H:
        spec = _spectrum(H, cfg.grid["cells"], cfg.grid["keep"])
        theta = np.array(_floats(args.theta)) if args.theta else \
            np.linspace(-1, 1, args.n_theta) * args.radius_frac * series_radius(args.t, H)
        prod = cf_eigprod(theta, args.t, spec)
        inside = np.abs(theta) <= 0.9 * series_radius(args.t, H)
        ser = np.full(theta.shape, np.nan, dtype=complex)
        if np.any(inside):
            ser[inside] = np.exp(logcf_series(theta[inside], args.t, H, spec=spec)[0])
            worst = max(worst, float(np.max(np.abs(ser[inside] - prod[inside]))))
        for th, p, s in zip(theta, np.atleast_1d(prod), ser):
            rows.append((H, args.t, th, "product", p.real, p.imag))
            if np.isfinite(s):
                rows.append((H, args.t, th, "series", s.real, s.imag))
    _emit(cfg, _csv_text(["H", "t", "theta", "route", "re", "im"], rows), started, {"max_route_gap": worst})
    return 0 if worst < cfg.tolerances["cf"] else 1


def cmd_simulate(args, cfg: RunConfig, started: float) -> int:
    from .chaos import simulate_paths
    times = _floats(args.times)
    method = args.method.replace("-", "_")
    if len(cfg.H) != 1:
        raise ConfigError("simulate takes a single H")
    ens = simulate_paths(times, cfg.H[0], args.paths, SeedSpec(cfg.seed, args.stream), method)
    rows = [(p, t, x) for p, t, x in ens.to_csv_rows()]
    _emit(cfg, _csv_text(["path", "t", "x"], rows), started, ens.meta)
    return 0


def cmd_verify_ito(args, cfg: RunConfig, started: float) -> int:
    from .stransform import ito_residual_PW, ito_residual_poly, support_limit, windowed_cosine
    results, ok = [], True
    for H in cfg.H:
        spec = _spectrum(H, cfg.grid["cells"], cfg.grid["keep"])
        for label, xi in xi_panel(args.xi_panel):
            if args.degree in ("2", "3"):
                deg = int(args.degree)
                R = ito_residual_poly(deg, args.a, args.b, xi, H, spec=spec)
                tol = cfg.tolerances[f"ito{deg}"]
                passed = R.relative < tol
            else:
                F = windowed_cosine(args.theta_frac * support_limit(args.b, H), omega=1.0, shift=0.3)
                R = ito_residual_PW(F, args.a, args.b, xi, args.kmax, spec)
                tol = cfg.tolerances["itopw"]
                passed = R.residual <= R.bound + tol
            ok &= bool(passed)
            row = {"H": H, "xi": label, **R.to_dict(), "tolerance": tol, "pass": bool(passed)}
            results.append(row)
    _emit(cfg, dumps_canonical(results) + "\n", started)
    return 0 if ok else 1


def cmd_verify_variance(args, cfg: RunConfig, started: float) -> int:
    from .chaos import IntegrandSpec, variance_bruteforce, variance_rhs
    try:
        phi = IntegrandSpec.load(args.spec)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read integrand spec: {exc}") from exc
    results, ok = [], True
    for H in cfg.H:
        terms = variance_rhs(phi, H)
        brute = variance_bruteforce(phi, H)
        rhs = sum(terms)
        gap = abs(rhs - brute) / max(abs(brute), 1e-300) if brute else abs(rhs)
        passed = gap < cfg.tolerances["variance"]
        row = {"H": H, "terms": list(terms), "rhs": rhs, "bruteforce": brute, "relative_gap": gap}
        if phi.order == 0 and len(phi.atoms) == 1 and tuple(phi.atoms[0][0]) == (1.0,):
            closed = (phi.b - phi.a) ** (2 * H)
            row["closed_form"] = closed
            passed &= abs(terms[0] - closed) / closed < cfg.tolerances["variance"]
        row["pass"] = bool(passed)
        ok &= bool(passed)
        results.append(row)
    _emit(cfg, dumps_canonical(results) + "\n", started)
    return 0 if ok else 1


def cmd_verify_skorohod(args, cfg: RunConfig, started: float) -> int:
    from .fracint import SmoothTestFunction
    from .stransform import ChaosIntegrand, s_X, s_Z, skorohod_equality_check
    # positive bump: its mass on (-∞, 0] is Φ(-6) ≈ 1e-9 of the total
    xi = SmoothTestFunction.gaussian(0.6, 0.1)
    integrands = {
        "constant": ChaosIntegrand(0),
        "quadratic_time": ChaosIntegrand(0, time_factor=lambda t: 1 + np.asarray(t) ** 2),
        "first_chaos_bump": ChaosIntegrand(1, space=SmoothTestFunction.gaussian(0.5, 0.3)),
    }
    results, ok = [], True
    for H in cfg.H:
        for name, phi in integrands.items():
            r = skorohod_equality_check(phi, args.T, xi, H)
            passed = r["residual"] < cfg.tolerances["skorohod"]
            ok &= passed
            results.append({"H": H, "integrand": name, **r, "pass": bool(passed)})
        gap = abs(s_X(args.T, xi, H) - s_Z(args.T, xi, H))
        passed = gap > cfg.tolerances["witness"]
        ok &= passed
        results.append({"H": H, "integrand": "witness |s_X - s_Z|", "gap": gap, "pass": bool(passed)})
    _emit(cfg, dumps_canonical(results) + "\n", started)
    return 0 if ok else 1


def _selftest_checks(quick: bool):
    from .chaos import ChaosVector, wick
    from .fracint import SmoothTestFunction
    from .kernels import make_hurst
    from .moments import ck_exact, ck_quadrature, kappa_r
    from .numcore import cell_grid
    from .stransform import (ito_residual_poly, s_cube, s_hermite_dot, s_square, s_X, s_Xdot, s_Xk,
                             s_Z, skorohod_equality_check, ChaosIntegrand)
    zero = SmoothTestFunction.zero()
    xi = SmoothTestFunction.gaussian(0.3, 0.25)
    H = 0.75
    h = make_hurst(H)
    grid = cell_grid(np.linspace(0, 1, 9))
    g = ChaosVector.first(grid, np.arange(8.0))
    checks = [
        ("kappa2 closed form = 1", lambda: abs(kappa_r(h, 2) - 1) < 1e-12),
        ("s_X at t = 0", lambda: s_X(0.0, xi, h) == 0.0),
        ("s_X at xi = 0", lambda: s_X(1.0, zero, h) == 0.0),
        ("s_Xdot at xi = 0", lambda: s_Xdot(1.0, zero, h) == 0.0),
        ("s_Xk at xi = 0", lambda: s_Xk(1.0, zero, h, 3) == 0.0),
        ("s_square at xi = 0", lambda: s_square(0.7, zero, h) == 0.7 ** (2 * H)),
        ("s_cube at xi = 0", lambda: abs(s_cube(0.7, zero, h) - kappa_r(h, 3) * 0.7 ** (3 * H)) < 1e-15),
        ("hermite d=2 equals s_Xdot", lambda: s_hermite_dot(0.8, xi, H, 2) == s_Xdot(0.8, xi, h)),
        ("s_Z at xi = 0", lambda: s_Z(1.0, zero, h) == 0.0),
        ("Ito x^2 exact at xi = 0", lambda: ito_residual_poly(2, 0.5, 1.0, zero, h).residual == 0.0),
        ("Ito x^3 exact at xi = 0", lambda: ito_residual_poly(3, 0.5, 1.0, zero, h).residual == 0.0),
        ("wick with 1 is identity",
         lambda: np.array_equal(wick(g, ChaosVector.constant(grid, 1.0)).kernel(1), g.kernel(1))),
        ("Skorohod at phi = 0",
         lambda: skorohod_equality_check(ChaosIntegrand(0, time_factor=lambda t: 0 * np.asarray(t)),
                                         1.0, xi, h)["residual"] == 0.0),
    ]
    if not quick:
        checks += [
            ("kappa2 by quadrature", lambda: abs(ck_quadrature(h, 2).value * h.kappa ** 2 * 2 - 1) < 1e-3),
            ("c3 closed form vs quadrature", lambda: abs(ck_quadrature(h, 3).value - ck_exact(h, 3)) < 1e-6),
            ("Ito x^2 residual", lambda: ito_residual_poly(2, 0.5, 1.0, xi, h).relative < 1e-4),
        ]
    return checks


def cmd_selftest(args, cfg: RunConfig, started: float) -> int:
    rows, ok = [], True
    for name, fn in _selftest_checks(args.quick):
        try:
            passed = bool(fn())
        except Exception as exc:  # a crash is a failure, reported by name
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        rows.append((name, "PASS" if passed else "FAIL"))
    _emit(cfg, _csv_text(["check", "status"], rows), started)
    return 0 if ok else 1


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rosenblatt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, H_default=DEFAULT_H_PANEL):
        sp.add_argument("--H", default=",".join(map(str, H_default)), help="comma-separated Hurst values")
        sp.add_argument("--seed", type=int, default=20240601)
        sp.add_argument("--cells", type=int, default=2000, help="cells of the spectral grid")
        sp.add_argument("--keep", type=int, default=200, help="eigenvalues kept")
        sp.add_argument("--out", default=None, help="output file (stdout if omitted)")
        sp.add_argument("--config", default=None, help="JSON file whose keys override the flags")

    sp = sub.add_parser("cumulants", help="cumulant table")
    common(sp, (0.75,))
    sp.add_argument("--max-order", type=int, default=4)
    sp.add_argument("--method", default="auto", choices=["auto", "exact", "quadrature", "montecarlo", "spectral"])

    sp = sub.add_parser("spectrum", help="eigenvalues of the kernel operator")
    common(sp, (0.75,))
    sp.add_argument("--tol", type=float, default=1e-3, help="tolerance on sum of lambda^2 = 1/2")

    sp = sub.add_parser("charfn", help="characteristic function by product and series")
    common(sp, (0.75,))
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--theta", default=None, help="comma-separated θ values")
    sp.add_argument("--n-theta", type=int, default=21)
    sp.add_argument("--radius-frac", type=float, default=0.9)
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = sub.add_parser("simulate", help="sample paths")
    common(sp, (0.75,))
    sp.add_argument("--method", default="doublesum", choices=["doublesum", "finite-interval"])
    sp.add_argument("--times", default="0.2,0.4,0.6,0.8,1.0")
    sp.add_argument("--paths", type=int, default=1000)
    sp.add_argument("--stream", type=int, default=21)

    sp = sub.add_parser("verify-ito", help="S-transform residuals of the change-of-variable formulas")
    common(sp)
    sp.add_argument("--degree", default="2", choices=["2", "3", "pw"])
    sp.add_argument("--a", type=float, default=0.5)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--xi-panel", default="default")
    sp.add_argument("--kmax", type=int, default=20)
    sp.add_argument("--theta-frac", type=float, default=0.7, help="θ_max as a fraction of 1/(√2 b^H)")

    sp = sub.add_parser("verify-variance", help="three-term variance against permutation enumeration")
    common(sp, (0.75,))
    sp.add_argument("--spec", required=True, help="integrand spec JSON")
    sp.add_argument("--tol", type=float, default=1e-3)

    sp = sub.add_parser("verify-skorohod", help="Skorohod and Wick sides for the finite-interval process")
    common(sp, (0.75,))
    sp.add_argument("--T", type=float, default=1.0)

    sp = sub.add_parser("selftest", help="fast internal checks")
    common(sp, (0.75,))
    sp.add_argument("--quick", action="store_true")
    return p


def _config_from(args) -> RunConfig:
    if args.config:
        try:
            over = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        for k, v in over.items():
            key = k.replace("-", "_")
            if not hasattr(args, key):
                raise ConfigError(f"unknown config key {k!r}")
            setattr(args, key, v)
    H = args.H if isinstance(args.H, list) else _floats(str(args.H))
    tol = {"sum_lambda_sq": getattr(args, "tol", 1e-3), "cf": getattr(args, "tol", 1e-6),
           "ito2": 1e-4, "ito3": 1e-3, "itopw": 1e-4, "variance": getattr(args, "tol", 1e-3),
           "skorohod": 1e-5, "witness": 1e-3}
    params = {k: v for k, v in vars(args).items()
              if k not in ("H", "seed", "cells", "keep", "out", "config", "command")}
    out = args.out
    fmt = "json" if args.command.startswith("verify") else "csv"
    cfg = RunConfig(args.command, [float(x) for x in H], int(args.seed), tol,
                    {"cells": int(args.cells), "keep": int(args.keep)}, params, out, fmt)
    cfg.validate()
    return cfg


COMMANDS = {
    "cumulants": cmd_cumulants,
    "spectrum": cmd_spectrum,
    "charfn": cmd_charfn,
    "simulate": cmd_simulate,
    "verify-ito": cmd_verify_ito,
    "verify-variance": cmd_verify_variance,
    "verify-skorohod": cmd_verify_skorohod,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    started = time.time()
    try:
        cfg = _config_from(args)
        return COMMANDS[args.command](args, cfg, started)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
