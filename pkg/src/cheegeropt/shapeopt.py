"""Maximize lambda_q under lambda_p = 1 inside a box D.

Because F_pq is scale invariant, the constrained problem is solved by
minimizing F_pq over masks in D and rescaling the winner once so that its
lambda_p equals one.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from .cheeger import cheeger_dinkelbach
from .eigensolver import SolverError, SolverOptions, principal_eigen
from .geometry import (ISOTROPIC, Disk, Grid2D, GeometryError, Punctured,
                       Rectangle, ShapeUnion, inradius, largest_component,
                       make_grid, rasterize, rescale_spacing)
from .ratio import INF, RegimeError, parse_exponent, q_over_p, ratio_F

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnealOptions:
    steps: int = 2000
    initial_temperature: float = 0.01
    cooling: float = 0.998
    batch: int = 2
    seed: int = 0
    connectivity_repair: bool = False

    def __post_init__(self):
        if not 0 < self.cooling < 1:
            raise ValueError("cooling factor must lie in (0, 1)")
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


@dataclass
class TraceRow:
    step: int
    F: float
    accepted: bool
    temperature: float
    best_F: float


@dataclass
class ShapeOptResult:
    best_mask: np.ndarray
    best_F: float
    trace: List[TraceRow]
    rescale_t: float
    lambda_p_rescaled: float
    rescaled_grid: Optional[Grid2D] = None
    degenerate: bool = False


def rescale_to_constraint(mask, grid: Grid2D, p: float,
                          opts: SolverOptions = SolverOptions(),
                          strict: bool = False,
                          lam: Optional[float] = None) -> Tuple[float, Grid2D]:
    """Scale factor ``t`` with ``lambda_p(t * Omega) = 1`` and the scaled grid.

    ``lam`` skips the eigenvalue solve.  With ``strict`` the rescaled domain
    must stay inside D, which requires ``t <= 1``.
    """
    p = parse_exponent(p)
    if not 1 < p < INF:
        raise RegimeError("rescaling needs 1 < p < inf")
    if lam is None:
        lam = principal_eigen(mask, grid, p, opts).lambda_
    t = lam ** (1.0 / p)
    if strict and t > 1.0:
        raise GeometryError("rescaled domain escapes D")
    return t, rescale_spacing(grid, t)


class _Evaluator:
    """F_pq of successive masks, warm-started from the last accepted state."""

    def __init__(self, grid, p, q, opts):
        self.grid, self.p, self.q, self.opts = grid, p, q, opts
        self.state = {}

    def root(self, mask, e):
        prev = self.state.get(e)
        if e == INF:
            return 1.0 / inradius(mask, self.grid), None
        if e == 1:
            if prev is None:
                res = cheeger_dinkelbach(mask, self.grid, ISOTROPIC, self.opts)
            else:
                res = cheeger_dinkelbach(mask, self.grid, ISOTROPIC, self.opts,
                                         start_set=prev.cheeger_set,
                                         warm=prev.relaxed, warm_dual=prev.dual)
            return res.h, res
        init = None if prev is None else prev.eigenfunction.values
        res = principal_eigen(mask, self.grid, e, self.opts, initial=init)
        return res.root, res

    def __call__(self, mask):
        rp, cp = self.root(mask, self.p)
        rq, cq = self.root(mask, self.q)
        return rp / rq, {self.p: cp, self.q: cq}

    def commit(self, certs):
        self.state.update({k: v for k, v in certs.items() if v is not None})


def _frontier(mask: np.ndarray, domain: np.ndarray) -> np.ndarray:
    """Cells of D whose flip changes the boundary: 4-neighbours of the other phase."""
    P = np.pad(mask, 1)
    nb_in = P[:-2, 1:-1] | P[2:, 1:-1] | P[1:-1, :-2] | P[1:-1, 2:]
    nb_out = ~(P[:-2, 1:-1] & P[2:, 1:-1] & P[1:-1, :-2] & P[1:-1, 2:])
    return domain & ((mask & nb_out) | (~mask & nb_in))


def random_blob(domain: np.ndarray, grid: Grid2D, seed: int) -> np.ndarray:
    """Star-shaped random mask inside the domain (radial Fourier perturbation)."""
    rng = np.random.default_rng(seed)
    X, Y = grid.centers()
    cx, cy = X[domain].mean(), Y[domain].mean()
    theta = np.arctan2(Y - cy, X - cx)
    r = np.hypot(X - cx, Y - cy)
    R0 = 0.35 * min(grid.extent)
    radius = np.full_like(theta, R0)
    for k in range(2, 6):
        a, b = rng.normal(scale=0.08 * R0, size=2)
        radius += a * np.cos(k * theta) + b * np.sin(k * theta)
    blob = domain & (r <= radius)
    if not blob.any():
        blob = domain.copy()
    return blob


def optimize_mask(D_spec, grid: Grid2D, p, q,
                  anneal: AnnealOptions = AnnealOptions(),
                  solver: SolverOptions = SolverOptions(),
                  initial=None) -> ShapeOptResult:
    """Simulated annealing over masks inside D minimizing F_pq.

    ``initial`` is a mask, ``"full"`` (D itself, the default) or ``"blob"``.
    Proposals flip ``anneal.batch`` random frontier cells; acceptance is
    Metropolis at temperature ``T0 * cooling**step``.  The best mask seen is
    rescaled so that its lambda_p is one (finite p only).
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if not (1 <= q < p):
        raise RegimeError("optimization needs 1 <= q < p")
    domain = rasterize(D_spec, grid)
    if initial is None or (isinstance(initial, str) and initial == "full"):
        current = domain.copy()
    elif isinstance(initial, str) and initial == "blob":
        current = random_blob(domain, grid, anneal.seed)
    else:
        current = np.asarray(initial, dtype=bool) & domain
        if not current.any():
            raise GeometryError("initial mask does not meet D")

    rng = np.random.default_rng(anneal.seed)
    evaluate = _Evaluator(grid, p, q, solver)
    F_cur, certs = evaluate(current)
    evaluate.commit(certs)
    best_mask, best_F = current.copy(), F_cur
    best_certs = certs
    trace = [TraceRow(0, F_cur, True, anneal.initial_temperature, best_F)]
    accepted_any = False
    for step in range(1, anneal.steps + 1):
        T = anneal.initial_temperature * anneal.cooling ** step
        front = np.flatnonzero(_frontier(current, domain).ravel())
        if front.size == 0:
            break
        pick = rng.choice(front, size=min(anneal.batch, front.size), replace=False)
        proposal = current.copy().ravel()
        proposal[pick] = ~proposal[pick]
        proposal = proposal.reshape(current.shape)
        if anneal.connectivity_repair and proposal.any():
            proposal = largest_component(proposal)
        u = rng.random()
        if not proposal.any():
            trace.append(TraceRow(step, math.nan, False, T, best_F))
            continue
        try:
            F_new, new_certs = evaluate(proposal)
        except SolverError as exc:
            log.warning("step %d: evaluation failed (%s)", step, exc)
            trace.append(TraceRow(step, math.nan, False, T, best_F))
            continue
        dF = F_new - F_cur
        accept = dF <= 0 or u < math.exp(-dF / T)
        if accept:
            current, F_cur = proposal, F_new
            evaluate.commit(new_certs)
            accepted_any = True
            if F_new < best_F:
                best_mask, best_F, best_certs = proposal.copy(), F_new, new_certs
        trace.append(TraceRow(step, F_new, accept, T, best_F))

    degenerate = anneal.steps > 0 and not accepted_any
    if degenerate:
        log.warning("optimize_mask: no proposal accepted; returning the initial mask")

    t, lam_rescaled, new_grid = 1.0, math.nan, None
    if p < INF:
        eig = best_certs.get(p)
        if eig is None:
            eig = principal_eigen(best_mask, grid, p, solver)
        t, new_grid = rescale_to_constraint(best_mask, grid, p, solver, lam=eig.lambda_)
        lam_rescaled = principal_eigen(best_mask, new_grid, p, solver,
                                       initial=eig.eigenfunction.values).lambda_
    return ShapeOptResult(best_mask, best_F, trace, t, lam_rescaled, new_grid, degenerate)


# -- parametric families ----------------------------------------------------

FAMILIES = ("rectangle", "ellipse", "stadium")


def family_domain(family: str, aspect: float, resolution: int):
    """Mask and grid for a member of a one-parameter family of convex sets.

    Every member has length 1 along x and width ``aspect`` along y, with
    ``resolution`` cells along x.  Rectangles fill their grid exactly, so
    the realized aspect is ``ny / resolution``; the others sit in a box with
    a margin of at least two cells.
    """
    if not 0 < aspect <= 1:
        raise ValueError("aspect must lie in (0, 1]")
    N = int(resolution)
    if family == "rectangle":
        ny = max(2, int(round(N * aspect)))
        grid = make_grid(N, ny, (1.0, ny / N))
        return np.ones((N, ny), dtype=bool), grid, ny / N
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    h = 1.0 / N
    margin = 2
    nx = N + 2 * margin
    ny = int(math.ceil(aspect * N)) + 2 * margin
    grid = make_grid(nx, ny, (nx * h, ny * h))
    cx, cy = 0.5 * nx * h, 0.5 * ny * h
    X, Y = grid.centers()
    if family == "ellipse":
        mask = ((X - cx) / 0.5) ** 2 + ((Y - cy) / (0.5 * aspect)) ** 2 <= 1.0
    else:
        r = 0.5 * aspect
        half = 0.5 - r
        parts = (Disk((cx - half, cy), r), Disk((cx + half, cy), r))
        if half > 0:
            parts += (Rectangle((cx - half, cy - r), 2 * half, 2 * r),)
        mask = ShapeUnion(parts).contains(X, Y)
    return mask, grid, aspect


@dataclass
class ParametricResult:
    family: str
    best_parameter: float
    best_F: float
    samples: List[Tuple[float, float]] = field(default_factory=list)


def family_ratio(family, aspect, p, q, resolution, opts=SolverOptions()):
    mask, grid, realized = family_domain(family, aspect, resolution)
    return realized, ratio_F(mask, grid, p, q, opts, domain=f"{family}:{realized:.6g}").F


def optimize_parametric(family: str, p, q, resolution: int = 256,
                        opts: SolverOptions = SolverOptions(),
                        bounds: Tuple[float, float] = (0.05, 1.0),
                        samples: Sequence[float] = (), tol: float = 0.01,
                        max_evals: int = 20) -> ParametricResult:
    """Golden-section search for the aspect minimizing F_pq within a family.

    ``samples`` are extra aspects evaluated for the returned curve.  Every
    evaluation, sampled or searched, is in ``samples`` of the result.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (0 < lo < hi <= 1):
        raise ValueError("invalid aspect range")
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    seen = {}

    def f(a):
        realized, F = family_ratio(family, a, p, q, resolution, opts)
        seen[realized] = F
        return F

    for a in samples:
        f(a)
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol and evals < max_evals:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
        evals += 1
    for end in (lo, hi):
        f(end)
    best_a = min(seen, key=seen.get)
    return ParametricResult(family, best_a, seen[best_a], sorted(seen.items()))


# -- punctured balls --------------------------------------------------------

def puncture_points(n: int, seed: int, center=(1.1, 1.1), radius: float = 0.9):
    """First ``n`` points of a scrambled Halton sequence mapped into a disk.

    Area-uniform polar map; point sets for increasing ``n`` are nested.
    """
    if n < 0:
        raise ValueError("number of punctures must be nonnegative")
    if n == 0:
        return []
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    uv = sampler.random(n)
    r = radius * np.sqrt(uv[:, 0])
    th = 2.0 * np.pi * uv[:, 1]
    return [(center[0] + a * np.cos(b), center[1] + a * np.sin(b)) for a, b in zip(r, th)]


def punctured_disk(n: int, resolution: int, seed: int, radius_cells: float = 1.0):
    """Unit disk in a 2.2 x 2.2 box with ``n`` single-cell punctures."""
    grid = make_grid(resolution, resolution, (2.2, 2.2))
    base = Disk((1.1, 1.1), 1.0)
    pts = puncture_points(n, seed)
    shape = Punctured(base, tuple(pts), radius_cells) if pts else base
    return rasterize(shape, grid), grid


def puncture_experiment(n_list: Sequence[int], p, q, resolution: int = 256,
                        seed: int = 0, opts: SolverOptions = SolverOptions()):
    """``(n, F_pq)`` for the unit disk minus ``n`` quasi-random point holes."""
    p, q = parse_exponent(p), parse_exponent(q)
    if not (1 <= q <= 2 <= p):
        raise RegimeError("puncture experiment needs q <= 2 <= p")
    out = []
    for n in n_list:
        n = int(n)
        if n < 0:
            raise ValueError("number of punctures must be nonnegative")
        mask, grid = punctured_disk(n, resolution, seed)
        out.append((n, ratio_F(mask, grid, p, q, opts, domain=f"punctured:{n}").F))
    return out


def lower_bound_holds(trace: Sequence[TraceRow], p, q) -> bool:
    bound = q_over_p(parse_exponent(p), parse_exponent(q))
    return all(row.F >= bound for row in trace if not math.isnan(row.F))


def _run_chain(args):
    D_spec, grid, p, q, anneal, solver, initial = args
    return optimize_mask(D_spec, grid, p, q, anneal, solver, initial)


def optimize_chains(D_spec, grid: Grid2D, p, q, seeds: Sequence[int],
                    anneal: AnnealOptions = AnnealOptions(),
                    solver: SolverOptions = SolverOptions(),
                    initial=None, workers: int = 1) -> ShapeOptResult:
    """Independent annealing chains, one per seed; the lowest best_F wins.

    Ties go to the earlier seed, so the result does not depend on ``workers``.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    jobs = [(D_spec, grid, p, q, replace(anneal, seed=int(s)), solver, initial)
            for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chain, jobs))
    else:
        results = [_run_chain(j) for j in jobs]
    return min(enumerate(results), key=lambda kr: (kr[1].best_F, kr[0]))[1]
