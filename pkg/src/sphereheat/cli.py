"""Command-line front end: moments, convergence studies, verification.

Subcommands:

* ``moment``  one monomial at one (N, t), any subset of routes
* ``study``   grid over monomials x N values x t values x routes, CSV out
* ``verify``  run the invariant suites, nonzero exit on failure
* ``mc``      Monte Carlo estimate with a matexp reference
* ``pde``     residual and spectral checks of the 1-D parabolic factors

Flags may also be supplied through ``--config FILE`` holding one
``key=value`` assignment per line (UTF-8, ``#`` comments); explicit flags
win.  ``SPHEREHEAT_THREADS`` caps the worker pool, floats are printed with
17 significant digits, and a fixed seed makes reruns byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import verify as verify_mod
from .eigenmethod import heat_moment_x1_eigen
from .gaussian_limit import gaussian_moment
from .heatop import heat_moment_monomial
from .operators import SphereConfig
from .pde_appendix import (
    FIRST_COORDINATE,
    OTHER_COORDINATE,
    grid_mass,
    mollified_delta_solution,
    residual,
    spectral_evolve,
)
from .sphere_mc import McConfig, mc_endpoints, mc_moment

CSV_HEADER = [
    "monomial", "N", "t", "route", "value", "limit", "abs_error", "stderr", "fitted_rate",
]
ALL_ROUTES = ("matexp", "series", "eigen", "mc")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _threads() -> int:
    env = os.environ.get("SPHEREHEAT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class StudySpec:
    """One study grid; every (monomial, N, t, route) cell becomes a CSV row."""

    monomials: list[tuple[int, ...]]
    n_values: list[int]
    t_values: list[float]
    routes: list[str]
    paths: int = 20000
    step: float = 1e-3
    seed: int = 0
    out: str | None = None
    precision: str = "double"
    degree: int | None = None
    k: int | None = None

    def __post_init__(self):
        if not self.monomials:
            raise ValueError("at least one monomial is required")
        for r in self.routes:
            if r not in ALL_ROUTES:
                raise ValueError(f"unknown route {r!r}")
        if any(t <= 0 for t in self.t_values):
            raise ValueError("t values must be positive")
        self.k = self.k or max(len(a) for a in self.monomials)
        self.monomials = [tuple(a) + (0,) * (self.k - len(a)) for a in self.monomials]
        self.degree = self.degree or max(sum(a) for a in self.monomials)
        for n in self.n_values:
            if n <= self.k:
                raise ValueError(f"N={n} must exceed k={self.k}")


@dataclass
class StudyRow:
    monomial: tuple[int, ...]
    N: int
    t: float
    route: str
    value: float | None
    limit: float
    stderr: float | None = None
    fitted_rate: float | None = field(default=None)

    @property
    def abs_error(self) -> float | None:
        if self.value is None:
            return None
        return abs(self.value - self.limit)

    def to_csv(self) -> list[str]:
        return [
            ",".join(str(e) for e in self.monomial),
            str(self.N),
            _fmt(self.t),
            self.route,
            _fmt(self.value) if self.value is not None else "failed",
            _fmt(self.limit),
            _fmt(self.abs_error) if self.value is not None else "",
            _fmt(self.stderr) if self.stderr is not None else "",
            _fmt(self.fitted_rate) if self.fitted_rate is not None else "",
        ]


def _route_value(
    spec: StudySpec, alpha: tuple[int, ...], n: int, t: float, route: str
) -> tuple[float | None, float | None]:
    """(value, stderr); value None marks a failed/unsupported route."""
    cfg = SphereConfig(N=n, t=t, k=spec.k, ell=spec.degree)
    try:
        if route == "mc":
            mc = McConfig(cfg=cfg, step_h=spec.step, n_paths=spec.paths, seed=spec.seed)
            est = mc_moment(mc, alpha, workers=1)
            return est.mean, est.stderr
        if route == "eigen":
            if any(alpha[1:]):
                return None, None  # closed form covers pure x1 powers only
            return heat_moment_x1_eigen(alpha[0], cfg), None
        res = heat_moment_monomial(cfg, alpha, route=route, precision=spec.precision)
        return res.value, None
    except Exception:
        return None, None


def run_study(spec: StudySpec) -> list[StudyRow]:
    """Compute all grid cells (thread pool), in canonical row order."""
    tasks = [
        (alpha, n, t, route)
        for alpha in spec.monomials
        for n in spec.n_values
        for t in spec.t_values
        for route in spec.routes
    ]

    def work(task):
        alpha, n, t, route = task
        value, stderr = _route_value(spec, alpha, n, t, route)
        return StudyRow(
            monomial=alpha, N=n, t=t, route=route,
            value=value, limit=gaussian_moment(alpha, t), stderr=stderr,
        )

    workers = _threads()
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, tasks))
    else:
        rows = [work(t) for t in tasks]
    rows.sort(key=lambda r: (r.monomial, r.N, r.t, r.route))
    _fill_rates(rows)
    return rows


def _fill_rates(rows: list[StudyRow]) -> None:
    """Fit err ~ C N^(-rate) per (monomial, t, route); annotate the last row."""
    groups: dict[tuple, list[StudyRow]] = {}
    for r in rows:
        groups.setdefault((r.monomial, r.t, r.route), []).append(r)
    for group in groups.values():
        pts = [
            (r.N, r.abs_error)
            for r in group
            if r.abs_error is not None and r.abs_error > 0 and math.isfinite(r.abs_error)
        ]
        if len(pts) < 2 or len({n for n, _ in pts}) < 2:
            continue
        logn = np.log([n for n, _ in pts])
        loge = np.log([e for _, e in pts])
        slope = float(np.polyfit(logn, loge, 1)[0])
        final = max(group, key=lambda r: r.N)
        final.fitted_rate = -slope


def write_csv(rows: list[StudyRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(r.to_csv())


# ----------------------------------------------------------------------
# argument handling
# ----------------------------------------------------------------------


def _parse_monomial(text: str) -> tuple[int, ...]:
    try:
        alpha = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad monomial {text!r}; use e.g. 2,0")
    if not alpha or any(e < 0 for e in alpha):
        raise argparse.ArgumentTypeError(f"bad monomial {text!r}")
    return alpha


def _parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",")]


def _parse_float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",")]


def _load_config(path: str) -> dict[str, list[str]]:
    values: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {line!r}; expected key=value")
            key, _, val = line.partition("=")
            values.setdefault(key.strip(), []).append(val.strip())
    return values


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    values = _load_config(args.config)
    converters = {
        "N": _parse_int_list,
        "t": _parse_float_list,
        "k": int,
        "degree": int,
        "monomial": None,  # handled below (repeatable)
        "routes": lambda s: s.split(","),
        "paths": int,
        "step": float,
        "seed": int,
        "out": str,
        "precision": str,
    }
    for key, raw in values.items():
        if key not in converters:
            parser.error(f"unknown config key {key!r}")
        if key == "monomial":
            if getattr(args, "monomial", None) in (None, []):
                args.monomial = [_parse_monomial(v) for v in raw]
            continue
        if getattr(args, key, None) is None:
            setattr(args, key, converters[key](raw[-1]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphereheat",
        description="heat-kernel moments on shifted spheres and their Gaussian limit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_routes=True):
        p.add_argument("--monomial", type=_parse_monomial, action="append",
                       help="comma-separated exponents, e.g. 2,0 (repeatable)")
        p.add_argument("--N", type=_parse_int_list, help="sphere parameter(s), comma list")
        p.add_argument("--t", type=_parse_float_list, help="time value(s), comma list")
        p.add_argument("--k", type=int, help="number of coordinates (default: monomial length)")
        p.add_argument("--degree", type=int, help="degree cap (default: monomial degree)")
        if with_routes:
            p.add_argument("--routes", type=lambda s: s.split(","),
                           help=f"subset of {','.join(ALL_ROUTES)}")
        p.add_argument("--paths", type=int, help="Monte Carlo path count")
        p.add_argument("--step", type=float, help="Monte Carlo time step")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--precision", choices=("double", "extended"),
                       help="float precision for the operator routes")

    p_moment = sub.add_parser("moment", help="one moment at one configuration")
    common(p_moment)

    p_study = sub.add_parser("study", help="convergence study over a grid")
    common(p_study)

    p_verify = sub.add_parser("verify", help="run invariant suites")
    p_verify.add_argument("suite", nargs="?", default="all",
                          choices=verify_mod.SUITES + ("all",))
    p_verify.add_argument("--paths", type=int, help="Monte Carlo path count")
    p_verify.add_argument("--config", help="key=value config file")

    p_mc = sub.add_parser("mc", help="Monte Carlo estimate with reference value")
    common(p_mc, with_routes=False)

    p_pde = sub.add_parser("pde", help="checks of the 1-D parabolic factors")
    p_pde.add_argument("--t", type=_parse_float_list, help="time value(s)")
    p_pde.add_argument("--config", help="key=value config file")

    return parser


def _make_spec(args, defaults_routes) -> StudySpec:
    return StudySpec(
        monomials=list(args.monomial or []),
        n_values=args.N or [16],
        t_values=args.t or [1.0],
        routes=args.routes if getattr(args, "routes", None) else defaults_routes,
        paths=args.paths if args.paths is not None else 20000,
        step=args.step if args.step is not None else 1e-3,
        seed=args.seed if args.seed is not None else 0,
        out=args.out,
        precision=args.precision or "double",
        degree=args.degree,
        k=args.k,
    )


def cmd_moment(args) -> int:
    spec = _make_spec(args, ["matexp"])
    rows = run_study(spec)
    for r in rows:
        if r.value is None:
            print(f"{r.route:7s} monomial=({','.join(map(str, r.monomial))}) "
                  f"N={r.N} t={_fmt(r.t)}  FAILED (route unsupported here)")
            continue
        extra = f"  stderr={_fmt(r.stderr)}" if r.stderr is not None else ""
        print(f"{r.route:7s} monomial=({','.join(map(str, r.monomial))}) "
              f"N={r.N} t={_fmt(r.t)}  value={_fmt(r.value)}  "
              f"limit={_fmt(r.limit)}  abs_error={_fmt(r.abs_error)}{extra}")
    return 0


def cmd_study(args) -> int:
    spec = _make_spec(args, list(ALL_ROUTES[:3]))
    rows = run_study(spec)
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        print(f"wrote {len(rows)} rows to {spec.out}")
    else:
        write_csv(rows, sys.stdout)
    failed = sum(1 for r in rows if r.value is None)
    fitted = [r.fitted_rate for r in rows if r.fitted_rate is not None]
    if fitted:
        print(f"fitted decay rates: {', '.join(_fmt(x) for x in fitted)}")
    if failed:
        print(f"{failed} route cells failed")
    return 0


def cmd_verify(args) -> int:
    suites = verify_mod.SUITES if args.suite == "all" else (args.suite,)
    all_ok = True
    for name in suites:
        kwargs = {}
        if name == "mc" and args.paths:
            kwargs["paths"] = args.paths
        results = verify_mod.run_suite(name, **kwargs)
        print(f"[{name}]")
        for r in results:
            print(f"  {r.status:4s} {r.name}  ({r.detail})")
            all_ok &= r.ok
    print("verification:", "PASS" if all_ok else "FAIL")
    return 0 if all_ok else 1


def cmd_mc(args) -> int:
    alpha = (args.monomial or [(0, 2)])[0]
    k = args.k or len(alpha)
    alpha = tuple(alpha) + (0,) * (k - len(alpha))
    n = (args.N or [8])[0]
    t = (args.t or [1.0])[0]
    cfg = SphereConfig(N=n, t=t, k=k, ell=args.degree or max(2, sum(alpha)))
    mc = McConfig(
        cfg=cfg,
        step_h=args.step if args.step is not None else 1e-3,
        n_paths=args.paths if args.paths is not None else 20000,
        seed=args.seed if args.seed is not None else 0,
    )
    endpoints = mc_endpoints(mc)
    est = mc_moment(mc, alpha, endpoints=endpoints)
    ref = heat_moment_monomial(cfg, alpha).value
    z = abs(est.mean - ref) / est.stderr if est.stderr else float("inf")
    print(f"monomial=({','.join(map(str, alpha))}) N={n} t={_fmt(t)} "
          f"paths={mc.n_paths} step={_fmt(mc.step_h)} seed={mc.seed}")
    print(f"estimate = {_fmt(est.mean)} +- {_fmt(est.stderr)}")
    print(f"matexp   = {_fmt(ref)}   ({z:.2f} standard errors away)")
    print(f"note: {est.bias_note}")
    return 0


def cmd_pde(args) -> int:
    times = args.t or [0.1, 1.0, 4.0]
    grid = np.linspace(-5.0, 5.0, 101)
    wide = np.linspace(-9.0, 9.0, 1201)
    for variant, name in ((FIRST_COORDINATE, "first-coordinate"),
                          (OTHER_COORDINATE, "other-coordinate")):
        print(f"[{name}]")
        for t in times:
            res = max(residual(variant, t, x, 1e-3) for x in (0.0, 1.0, -3.0))
            print(f"  t={_fmt(t)}: max residual (h=1e-3) = {res:.3e}")
        u = mollified_delta_solution(variant, 1.0, grid, eps=1e-3)
        closed = np.array([variant.closed_form(1.0, float(x)) for x in grid])
        print(f"  spectral-vs-closed max deviation at t=1: {np.max(np.abs(u - closed)):.3e}")
        masses = [grid_mass(spectral_evolve(variant, 1e-3, t, wide), wide)
                  for t in (0.3, 1.0, 3.0)]
        print(f"  mass drift: {max(abs(m - masses[0]) for m in masses):.3e}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, parser)
    try:
        if args.command == "moment":
            return cmd_moment(args)
        if args.command == "study":
            return cmd_study(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "mc":
            return cmd_mc(args)
        if args.command == "pde":
            return cmd_pde(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
