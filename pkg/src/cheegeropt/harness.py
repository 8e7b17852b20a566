"""Experiment plumbing: configs, the domain battery, sweeps and the CLI."""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import platform
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numba
import numpy as np
import scipy

from . import __version__
from . import io as fio
from .cheeger import cheeger_dinkelbach
from .eigensolver import SolverError, SolverOptions, principal_eigen, torsion
from .geometry import (Disk, GeometryError, Polygon, Rectangle, ShapeDifference,
                       ShapeUnion, make_grid, rasterize, rescale_spacing)
from .ratio import (INF, Check, CheckReport, RegimeError, is_nondecreasing,
                    monotonicity_scan, parse_exponent, ratio_F, reevaluate,
                    verify_inequalities)
from .shapeopt import (AnnealOptions, family_domain, optimize_chains,
                       puncture_experiment, punctured_disk)

COMMANDS = ("eigen", "cheeger", "torsion", "ratio", "verify", "optimize",
            "sweep", "puncture")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


# -- configuration ----------------------------------------------------------

@dataclass
class ExperimentConfig:
    command: str = "ratio"
    shape: str = ""
    extent: Tuple[float, float] = (1.0, 1.0)
    grid: int = 128
    p: List[float] = field(default_factory=lambda: [2.0])
    q: List[float] = field(default_factory=lambda: [1.0])
    mode: str = "isotropic"
    max_iterations: int = 50000
    tolerance: float = 1e-8
    continuation: bool = True
    steps: int = 2000
    temperature: float = 0.01
    cooling: float = 0.998
    batch: int = 2
    connectivity_repair: bool = False
    initial: str = "full"
    chains: int = 1
    battery: List[str] = field(default_factory=list)
    domains: List[str] = field(default_factory=list)
    punctures: List[int] = field(default_factory=lambda: [0, 5, 20, 80])
    slack: float = 0.02
    workers: int = 1
    out: str = "out"
    seed: int = 0

    def solver(self) -> SolverOptions:
        return SolverOptions(self.max_iterations, self.tolerance, self.seed,
                             self.continuation)

    def anneal(self) -> AnnealOptions:
        return AnnealOptions(self.steps, self.temperature, self.cooling,
                             self.batch, self.seed, self.connectivity_repair)


_LIST_KEYS = ("p", "q", "battery", "domains", "punctures")


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if v == INF else repr(v)
    return str(v)


def _coerce(name: str, raw: str, kind):
    try:
        if name in ("p", "q"):
            return parse_exponent(raw)
        if name == "extent":
            a, b = raw.split(",")
            return (float(a), float(b))
        if kind is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


_KINDS = {"command": str, "shape": str, "extent": tuple, "grid": int, "p": float,
          "q": float, "mode": str, "max_iterations": int, "tolerance": float,
          "continuation": bool, "steps": int, "temperature": float,
          "cooling": float, "batch": int, "connectivity_repair": bool,
          "initial": str, "chains": int, "battery": str, "domains": str,
          "punctures": int, "slack": float, "workers": int, "out": str,
          "seed": int}


def parse_config(text: str) -> ExperimentConfig:
    """Flat ``key=value`` lines; list keys repeat; ``#`` starts a comment."""
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KINDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        val = _coerce(key, raw, _KINDS[key])
        if key in _LIST_KEYS:
            values.setdefault(key, []).append(val)
        elif key in values:
            raise ConfigError(f"line {lineno}: {key} given twice")
        else:
            values[key] = val
    return ExperimentConfig(**values)


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in _LIST_KEYS:
            lines.extend(f"{f.name}={_fmt_value(x)}" for x in v)
        elif f.name == "extent":
            lines.append(f"extent={v[0]!r},{v[1]!r}")
        else:
            lines.append(f"{f.name}={_fmt_value(v)}")
    return "\n".join(lines) + "\n"


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if not 16 <= cfg.grid <= 1024:
        raise ConfigError("grid resolution must lie in [16, 1024]")
    if not cfg.p or not cfg.q:
        raise ConfigError("p and q lists must be non-empty")
    if any(not e >= 1 for e in cfg.p + cfg.q):
        raise RegimeError("exponents must be >= 1")
    if cfg.command in ("ratio", "sweep", "optimize", "puncture"):
        if any(q > p for p in cfg.p for q in cfg.q):
            raise RegimeError("regime q ≤ p only")
    if cfg.slack >= 1:
        raise ConfigError("slack must be below 1")
    if cfg.workers < 1 or cfg.chains < 1:
        raise ConfigError("workers and chains must be positive")
    return cfg


# -- domains ----------------------------------------------------------------

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _numbers(body: str, n: Optional[int], what: str) -> List[float]:
    parts = [s for s in re.split(r"[,;\s]+", body.strip()) if s]
    if not all(re.fullmatch(_NUM, s) for s in parts) or (n is not None and len(parts) != n):
        raise ConfigError(f"bad {what} spec {body!r}")
    return [float(s) for s in parts]


def _primitive(term: str):
    kind, _, body = term.partition(":")
    kind = kind.strip().lower()
    if kind == "disk":
        cx, cy, r = _numbers(body, 3, "disk")
        return Disk((cx, cy), r)
    if kind in ("rect", "rectangle"):
        x, y, w, h = _numbers(body, 4, "rect")
        return Rectangle((x, y), w, h)
    if kind == "polygon":
        v = _numbers(body, None, "polygon")
        if len(v) % 2 or len(v) < 6:
            raise ConfigError(f"bad polygon spec {body!r}")
        return Polygon(tuple(zip(v[0::2], v[1::2])))
    raise ConfigError(f"unknown shape kind {kind!r}")


def parse_shape(spec: str):
    """``disk:cx,cy,r``, ``rect:x,y,w,h``, ``polygon:x,y;x,y;...`` joined by
    `` + `` (union) or `` - `` (difference), left to right."""
    tokens = re.split(r"\s+([+-])\s+", spec.strip())
    if not tokens or not tokens[0]:
        raise ConfigError("empty shape spec")
    shape = _primitive(tokens[0])
    for op, term in zip(tokens[1::2], tokens[2::2]):
        other = _primitive(term)
        shape = ShapeUnion((shape, other)) if op == "+" else ShapeDifference(shape, other)
    return shape


def grid_for(resolution: int, extent=(1.0, 1.0)):
    ex, ey = extent
    ny = resolution * ey / ex
    if abs(ny - round(ny)) > 1e-9 * ny or round(ny) < 2:
        raise ConfigError("extent aspect must give a whole number of cells")
    return make_grid(resolution, int(round(ny)), (ex, ey))


BATTERY = ("disk", "square", "rect0.5", "rect0.2", "rect0.1", "rect0.05",
           "lshape", "annulus", "punctured")
CONVEX = frozenset(BATTERY[:6])
_L_VERTICES = ((0.05, 0.05), (0.95, 0.05), (0.95, 0.5), (0.5, 0.5),
               (0.5, 0.95), (0.05, 0.95))


def battery_domain(name: str, resolution: int, seed: int = 0):
    """``(mask, grid)`` of a named standard domain."""
    if name == "disk":
        grid = make_grid(resolution, resolution, (2.2, 2.2))
        return rasterize(Disk((1.1, 1.1), 1.0), grid), grid
    if name == "square":
        grid = make_grid(resolution, resolution, (1.0, 1.0))
        return rasterize(Rectangle((0.0, 0.0), 1.0, 1.0), grid), grid
    if name.startswith("rect"):
        try:
            aspect = float(name[4:])
        except ValueError:
            raise ConfigError(f"unknown domain {name!r}") from None
        mask, grid, _ = family_domain("rectangle", aspect, resolution)
        return mask, grid
    if name == "lshape":
        grid = make_grid(resolution, resolution, (1.0, 1.0))
        return rasterize(Polygon(_L_VERTICES), grid), grid
    if name == "annulus":
        grid = make_grid(resolution, resolution, (2.2, 2.2))
        shape = ShapeDifference(Disk((1.1, 1.1), 1.0), Disk((1.1, 1.1), 0.4))
        return rasterize(shape, grid), grid
    if name == "punctured":
        return punctured_disk(5, resolution, seed)
    raise ConfigError(f"unknown domain {name!r}")


def resolve_domain(spec: str, resolution: int, extent=(1.0, 1.0), seed: int = 0):
    """A battery name or a shape spec, as ``(mask, grid)``."""
    if not spec:
        raise ConfigError("no shape given")
    if ":" not in spec:
        return battery_domain(spec, resolution, seed)
    grid = grid_for(resolution, extent)
    return rasterize(parse_shape(spec), grid), grid


# -- verification battery ---------------------------------------------------

BATTERY_PAIRS = ((2.0, 1.0), (3.0, 1.0), (3.0, 2.0), (4.0, 2.0), (INF, 1.0), (INF, 2.0))
MONOTONE_PS = (1.0, 1.5, 2.0, 3.0, 4.0)
MONOTONE_DOMAINS = ("disk", "square")


def _domain_checks(name, resolution, solver, slack, seed) -> CheckReport:
    mask, grid = battery_domain(name, resolution, seed)
    cache: dict = {}
    out = CheckReport()
    for p, q in BATTERY_PAIRS:
        rep = ratio_F(mask, grid, p, q, solver, domain=name, cache=cache)
        out.extend(verify_inequalities(rep, convex=name in CONVEX and (p, q) == (2.0, 1.0)))
        if (p, q) == (2.0, 1.0):
            for t in (0.5, 2.0):
                Ft = reevaluate(rep, rescale_spacing(grid, t)).F
                err = abs(Ft - rep.F)
                out.rows.append(Check(f"scaling_t{t:g}", 1e-12 * rep.F, err,
                                      err <= 1e-12 * rep.F,
                                      "F unchanged when the spacing is rescaled",
                                      name, p, q))
    if name in MONOTONE_DOMAINS:
        series = monotonicity_scan(mask, grid, MONOTONE_PS, solver, cache)
        for (pa, va), (pb, vb) in zip(series, series[1:]):
            out.rows.append(Check("monotonicity", vb, va * (1 - slack),
                                  is_nondecreasing([va, vb], slack),
                                  f"p lambda_p^(1/p) nondecreasing from p={pa:g} to p={pb:g}",
                                  name, pb, pa))
    return out


def run_battery(config: ExperimentConfig) -> CheckReport:
    """Every invariant suite on the named domains; one row per check."""
    names = list(config.battery)
    if names == ["default"]:
        names = list(BATTERY)
    if not names:
        raise ConfigError("nothing to verify")
    solver = config.solver()
    report = CheckReport()
    for name in names:
        try:
            report.extend(_domain_checks(name, config.grid, solver, config.slack, config.seed))
        except SolverError as exc:
            report.rows.append(Check("solver", math.nan, math.nan, False,
                                     f"solver failure: {exc}", name))
    return report


# -- sweeps -----------------------------------------------------------------

@dataclass
class SweepRow:
    domain: str
    p: float
    q: float
    lambda_root_p: float
    lambda_root_q: float
    F: float
    checks_passed: bool
    error: str = ""


@dataclass
class SweepSummary:
    p: float
    q: float
    min_F: float
    argmin: str
    max_F: float
    argmax: str
    note: str = ""


@dataclass
class SweepReport:
    rows: List[SweepRow]
    summary: List[SweepSummary]
    punctures: List[Tuple[int, float]] = field(default_factory=list)


DIVERGENCE_NOTE = ("sup over domains is infinite for q <= 2: "
                   "F(inf; q) of a disk grows without bound as point holes are added")


def _sweep_domain(job) -> List[SweepRow]:
    spec, pairs, resolution, extent, solver, seed = job
    try:
        mask, grid = resolve_domain(spec, resolution, extent, seed)
    except (GeometryError, ConfigError) as exc:
        return [SweepRow(spec, p, q, math.nan, math.nan, math.nan, False, str(exc))
                for p, q in pairs]
    cache: dict = {}
    rows = []
    for p, q in pairs:
        try:
            rep = ratio_F(mask, grid, p, q, solver, domain=spec, cache=cache)
            ok = verify_inequalities(rep).passed
            rows.append(SweepRow(spec, p, q, rep.lambda_root_p, rep.lambda_root_q,
                                 rep.F, ok))
        except SolverError as exc:
            rows.append(SweepRow(spec, p, q, math.nan, math.nan, math.nan, False, str(exc)))
    return rows


def run_sweep(domains: Sequence[str], p_list: Sequence, q_list: Sequence,
              resolution: int = 128, opts: SolverOptions = SolverOptions(),
              workers: int = 1, extent=(1.0, 1.0),
              punctures: Sequence[int] = (0, 5, 20), seed: int = 0) -> SweepReport:
    """Cross product of domains and exponents, one independent job per domain."""
    ps = [parse_exponent(p) for p in p_list]
    qs = [parse_exponent(q) for q in q_list]
    if not domains or not ps or not qs:
        raise ConfigError("sweep lists must be non-empty")
    pairs = sorted({(p, q) for p in ps for q in qs})
    bad = [(p, q) for p, q in pairs if not 1 <= q <= p]
    if bad:
        raise RegimeError(f"regime q ≤ p only (rejected {bad})")
    jobs = [(d, pairs, resolution, tuple(extent), opts, seed) for d in sorted(set(domains))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_domain, jobs))
    else:
        chunks = [_sweep_domain(j) for j in jobs]
    rows = sorted((r for c in chunks for r in c), key=lambda r: (r.domain, r.p, r.q))

    summary = []
    for p, q in pairs:
        good = [r for r in rows if r.p == p and r.q == q and not r.error]
        if not good:
            continue
        lo = min(good, key=lambda r: (r.F, r.domain))
        hi = max(good, key=lambda r: (r.F, r.domain))
        summary.append(SweepSummary(p, q, lo.F, lo.domain, hi.F, hi.domain,
                                    DIVERGENCE_NOTE if q <= 2 else ""))
    series: List[Tuple[int, float]] = []
    if punctures and any(q <= 2 for q in qs):
        series = puncture_experiment(list(punctures), INF, min(qs), resolution, seed, opts)
    return SweepReport(rows, summary, series)


# -- command line -----------------------------------------------------------

def _manifest(cfg: ExperimentConfig, argv: Sequence[str]) -> Dict[str, object]:
    entries: Dict[str, object] = {"argv": " ".join(argv)}
    for line in serialize_config(cfg).splitlines():
        k, v = line.split("=", 1)
        entries.setdefault(k, [])
        entries[k].append(v)
    entries.update({"version": __version__, "python": platform.python_version(),
                    "numpy": np.__version__, "scipy": scipy.__version__,
                    "numba": numba.__version__})
    return entries


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--shape", help="battery name or e.g. disk:0.5,0.5,0.4")
    common.add_argument("--extent", help="box size as ex,ey (default 1,1)")
    common.add_argument("--grid", type=int, help="cells along x")
    common.add_argument("--p", nargs="+")
    common.add_argument("--q", nargs="+")
    common.add_argument("--mode", choices=("isotropic", "anisotropic"))
    common.add_argument("--tol", type=float, dest="tolerance")
    common.add_argument("--max-iter", type=int, dest="max_iterations")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="cheegeropt",
                                     description="Generalized Cheeger ratios on grids.")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)
    for name in ("eigen", "cheeger", "torsion", "ratio"):
        sub.add_parser(name, parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--battery", nargs="+", help="'default' or domain names")
    v.add_argument("--slack", type=float)
    o = sub.add_parser("optimize", parents=[common])
    o.add_argument("--steps", type=int)
    o.add_argument("--temperature", type=float)
    o.add_argument("--cooling", type=float)
    o.add_argument("--batch", type=int)
    o.add_argument("--initial", choices=("full", "blob"))
    o.add_argument("--chains", type=int)
    o.add_argument("--workers", type=int)
    o.add_argument("--connectivity-repair", action="store_const", const=True,
                   dest="connectivity_repair")
    s = sub.add_parser("sweep", parents=[common])
    s.add_argument("--domain", nargs="+", dest="domains")
    s.add_argument("--workers", type=int)
    s.add_argument("--punctures", nargs="*", type=int)
    pu = sub.add_parser("puncture", parents=[common])
    pu.add_argument("--n", nargs="+", type=int, dest="punctures")
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if ns.config:
        with open(ns.config) as fh:
            cfg = parse_config(fh.read())
    updates = {}
    for k, v in vars(ns).items():
        if v is None or k == "config":
            continue
        if k in ("p", "q"):
            v = [_coerce(k, x, float) for x in v]
        elif k == "extent":
            v = _coerce(k, v, tuple)
        updates[k] = v
    cfg = dataclasses.replace(cfg, **updates)
    if ns.command == "optimize" and not cfg.shape:
        cfg = dataclasses.replace(cfg, shape="rect:0,0,1,1", grid=cfg.grid if ns.grid else 64)
    if ns.command == "puncture" and (ns.grid is None and not ns.config):
        cfg = dataclasses.replace(cfg, grid=256)
    return validate_config(cfg)


def _say(text: str) -> None:
    print(text, flush=True)


def _single(values, what):
    if len(values) != 1:
        raise ConfigError(f"{what} takes a single value")
    return values[0]


def _cmd_eigen(cfg, out):
    mask, grid = resolve_domain(cfg.shape, cfg.grid, cfg.extent, cfg.seed)
    p = _single(cfg.p, "--p")
    res = principal_eigen(mask, grid, p, cfg.solver())
    fio.write_field_pgm(os.path.join(out, "field_eigen.pgm"), res.eigenfunction.values, grid)
    fio.write_field_csv(os.path.join(out, "field_eigen.csv"), res.eigenfunction.values,
                        grid, "u[length^(-2/p)]")
    fio.write_history_csv(os.path.join(out, "history.csv"), res.history,
                          "rayleigh[1/length^p]")
    _say(f"eigen p={p:g} lambda={res.lambda_!r} root={res.root!r} iterations={res.iterations}")


def _cmd_cheeger(cfg, out):
    mask, grid = resolve_domain(cfg.shape, cfg.grid, cfg.extent, cfg.seed)
    res = cheeger_dinkelbach(mask, grid, cfg.mode, cfg.solver())
    fio.write_mask_pgm(os.path.join(out, "mask_cheeger.pgm"), res.cheeger_set, grid)
    fio.write_history_csv(os.path.join(out, "history.csv"), res.history)
    _say(f"cheeger mode={cfg.mode} h={res.h!r} iterations={res.iterations}")


def _cmd_torsion(cfg, out):
    mask, grid = resolve_domain(cfg.shape, cfg.grid, cfg.extent, cfg.seed)
    p = _single(cfg.p, "--p")
    w = torsion(mask, grid, p, cfg.solver())
    fio.write_field_pgm(os.path.join(out, "field_torsion.pgm"), w.values, grid)
    fio.write_field_csv(os.path.join(out, "field_torsion.csv"), w.values, grid,
                        "w[length^(p/(p-1))]")
    _say(f"torsion p={p:g} max={float(w.values.max())!r}")


def _report_rows(reports):
    return ([r.domain, r.p, r.q, r.lambda_root_p, r.lambda_root_q, r.F, ok]
            for r, ok in reports)


def _cmd_ratio(cfg, out):
    mask, grid = resolve_domain(cfg.shape, cfg.grid, cfg.extent, cfg.seed)
    cache: dict = {}
    reports, checks = [], CheckReport()
    for p in cfg.p:
        for q in cfg.q:
            rep = ratio_F(mask, grid, p, q, cfg.solver(), domain=cfg.shape, cache=cache)
            chk = verify_inequalities(rep)
            checks.extend(chk)
            reports.append((rep, chk.passed))
            _say(f"ratio p={p:g} q={q:g} F={rep.F!r}")
    fio.write_csv(os.path.join(out, "report.csv"), fio.REPORT_HEADER, _report_rows(reports))
    fio.write_checks_csv(os.path.join(out, "checks.csv"), checks)


def _cmd_verify(cfg, out):
    if not cfg.battery:
        cfg = dataclasses.replace(cfg, battery=["default"])
    report = run_battery(cfg)
    fio.write_checks_csv(os.path.join(out, "checks.csv"), report)
    for row in report.failures():
        _say(f"FAIL {row.name} {row.domain} p={row.p:g} q={row.q:g} "
             f"lhs={row.lhs!r} rhs={row.rhs!r}")
    _say(f"verify rows={len(report.rows)} failed={len(report.failures())}")
    return 0 if report.passed else 1


def _cmd_optimize(cfg, out):
    p, q = _single(cfg.p, "--p"), _single(cfg.q, "--q")
    D = parse_shape(cfg.shape) if ":" in cfg.shape else None
    if D is None:
        raise ConfigError("optimize needs a shape spec for D, e.g. rect:0,0,1,1")
    grid = grid_for(cfg.grid, cfg.extent)
    seeds = [cfg.seed + k for k in range(cfg.chains)]
    res = optimize_chains(D, grid, p, q, seeds, cfg.anneal(), cfg.solver(),
                          cfg.initial, cfg.workers)
    fio.write_trace_csv(os.path.join(out, "trace.csv"), res.trace)
    fio.write_mask_pgm(os.path.join(out, "mask_best.pgm"), res.best_mask, grid)
    _say(f"optimize p={p:g} q={q:g} best_F={res.best_F!r} t={res.rescale_t!r} "
         f"lambda_p={res.lambda_p_rescaled!r}")


def _cmd_sweep(cfg, out):
    domains = cfg.domains or list(BATTERY)
    rep = run_sweep(domains, cfg.p, cfg.q, cfg.grid, cfg.solver(), cfg.workers,
                    cfg.extent, cfg.punctures, cfg.seed)
    fio.write_csv(os.path.join(out, "report.csv"), fio.REPORT_HEADER + ["error"],
                  ([r.domain, r.p, r.q, r.lambda_root_p, r.lambda_root_q, r.F,
                    r.checks_passed, r.error] for r in rep.rows))
    fio.write_csv(os.path.join(out, "summary.csv"),
                  ["p", "q", "min_F[dimensionless]", "argmin", "max_F[dimensionless]",
                   "argmax", "note"],
                  ([s.p, s.q, s.min_F, s.argmin, s.max_F, s.argmax, s.note]
                   for s in rep.summary))
    if rep.punctures:
        fio.write_csv(os.path.join(out, "puncture.csv"), ["n", "F[dimensionless]"],
                      rep.punctures)
    for s in rep.summary:
        _say(f"sweep p={s.p:g} q={s.q:g} min_F={s.min_F!r} ({s.argmin}) "
             f"max_F={s.max_F!r} ({s.argmax})")
    return 0 if not any(r.error for r in rep.rows) else 1


def _cmd_puncture(cfg, out):
    p, q = _single(cfg.p, "--p"), _single(cfg.q, "--q")
    series = puncture_experiment(cfg.punctures, p, q, cfg.grid, cfg.seed, cfg.solver())
    fio.write_csv(os.path.join(out, "puncture.csv"), ["n", "F[dimensionless]"], series)
    for n, F in series:
        _say(f"puncture n={n} F={F!r}")


_HANDLERS = {"eigen": _cmd_eigen, "cheeger": _cmd_cheeger, "torsion": _cmd_torsion,
             "ratio": _cmd_ratio, "verify": _cmd_verify, "optimize": _cmd_optimize,
             "sweep": _cmd_sweep, "puncture": _cmd_puncture}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Exit code 0 on success, 1 on solver error or failed checks, 2 on bad input."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        out = fio.ensure_dir(cfg.out)
        fio.write_manifest(os.path.join(out, "manifest.txt"), _manifest(cfg, argv))
        code = _HANDLERS[cfg.command](cfg, out)
        return int(code or 0)
    except (ConfigError, GeometryError, RegimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
