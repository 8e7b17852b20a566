"""Cheeger constant of a mask: the p = 1 end of the eigenvalue family.

``cheeger_dinkelbach`` alternates between a ratio estimate ``c`` and the
convex problem

    min { TV(u) - c * sum(u) : 0 <= u <= 1, u = 0 off the mask },

solved by a diagonally preconditioned primal-dual iteration.  The best
superlevel set of the relaxed solution gives the next ratio.  TV is the
directional stencil of :mod:`geometry`, so every iterate is the exact
discrete ratio of an actual set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numba
import numpy as np

from .eigensolver import SolverError, SolverOptions
from .geometry import (ANISOTROPIC, Disk, GeometryError, Grid2D, Rectangle,
                       directional_tv, stencil)

LEVELS = np.round(np.arange(1, 100) * 0.01, 2)


@dataclass
class CheegerResult:
    h: float
    cheeger_set: np.ndarray
    iterations: int
    mode: str
    history: List[float] = field(default_factory=list)
    relaxed: Optional[np.ndarray] = None
    dual: Optional[np.ndarray] = None


class CheegerNotConverged(SolverError):
    def __init__(self, msg, best: CheegerResult):
        super().__init__(msg)
        self.best = best


_PAD = 2


@numba.njit(cache=True, fastmath=True)
def _pd_kernel(u, mask, y, dirs, w, c, tau, iterations, tol):
    """Primal-dual iterations for min TV(u) - c sum(u) over the box.

    ``y[k]`` holds the dual variable of direction ``k`` at the padded base
    cell of each difference.  Diagonal preconditioning: sigma_k = 1/(2 w_k),
    tau = 1/(2 sum w).  Stops when neither variable moves by more than
    ``tol``; returns the number of iterations run.
    """
    nx, ny = u.shape
    n0, n1 = nx + 2 * _PAD, ny + 2 * _PAD
    ubar = np.zeros((n0, n1))
    G = np.zeros((n0, n1))
    for i in range(nx):
        for j in range(ny):
            ubar[i + _PAD, j + _PAD] = u[i, j]
    nd = dirs.shape[0]
    it = 0
    while it < iterations:
        it += 1
        change = 0.0
        G[:, :] = 0.0
        for k in range(nd):
            vx, vy = dirs[k, 0], dirs[k, 1]
            wk = w[k]
            for i in range(max(0, -vx), min(n0, n0 - vx)):
                for j in range(max(0, -vy), min(n1, n1 - vy)):
                    old = y[k, i, j]
                    v = min(1.0, max(-1.0, old + 0.5 * (ubar[i + vx, j + vy] - ubar[i, j])))
                    y[k, i, j] = v
                    change = max(change, abs(v - old))
                    wy = wk * v
                    G[i + vx, j + vy] += wy
                    G[i, j] -= wy
        for i in range(nx):
            for j in range(ny):
                if not mask[i, j]:
                    continue
                old = u[i, j]
                new = min(1.0, max(0.0, old - tau * (G[i + _PAD, j + _PAD] - c)))
                u[i, j] = new
                ubar[i + _PAD, j + _PAD] = 2.0 * new - old
                change = max(change, abs(new - old))
        if change < tol:
            break
    return it


def _relaxed_solve(mask, mode, c, u, y, iterations, tol=1e-7):
    terms = stencil(mode)
    dirs = np.array([v for v, _ in terms], dtype=np.int64)
    w = np.array([wk for _, wk in terms])
    tau = 1.0 / (2.0 * w.sum())
    _pd_kernel(u, mask, y, dirs, w, float(c), tau, int(iterations), float(tol))
    return u, y


def _ratio_cells(setmask, mode) -> float:
    return directional_tv(setmask, mode) / float(setmask.sum())


def _best_superlevel(u, mask, mode):
    vals = u[mask]
    best = None
    prev_count = -1
    for t in LEVELS:
        count = int((vals > t).sum())
        if count == 0:
            break
        if count == prev_count:
            continue
        prev_count = count
        s = mask & (u > t)
        r = _ratio_cells(s, mode)
        if best is None or r < best[0]:
            best = (r, s)
    return best


def cheeger_dinkelbach(mask, grid: Grid2D, mode: str = "isotropic",
                       opts: SolverOptions = SolverOptions(),
                       inner_iterations: int = 1000,
                       start_set: Optional[np.ndarray] = None,
                       warm: Optional[np.ndarray] = None,
                       warm_dual: Optional[np.ndarray] = None) -> CheegerResult:
    """Discrete Cheeger constant by Dinkelbach iteration.

    ``start_set`` (any nonempty subset of the mask) may replace the full
    mask as the initial upper bound when it has a smaller ratio; ``warm``
    and ``warm_dual`` (the ``relaxed`` and ``dual`` fields of an earlier
    result on the same grid) warm-start the primal-dual iteration.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise GeometryError("empty mask")
    if mask.shape != grid.shape:
        raise GeometryError("mask does not match grid")
    stencil(mode)
    best_set = mask.copy()
    ratio = _ratio_cells(best_set, mode)
    if start_set is not None:
        s = np.asarray(start_set, dtype=bool) & mask
        if s.any():
            r = _ratio_cells(s, mode)
            if r < ratio:
                ratio, best_set = r, s
    history = [ratio]
    u = best_set.astype(float) if warm is None else np.clip(np.where(mask, warm, 0.0), 0, 1)
    dshape = (len(stencil(mode)), mask.shape[0] + 2 * _PAD, mask.shape[1] + 2 * _PAD)
    if warm_dual is not None and warm_dual.shape == dshape:
        ys = warm_dual.copy()
    else:
        ys = np.zeros(dshape)
    converged = False
    k = 0
    for k in range(1, opts.max_iterations + 1):
        u, ys = _relaxed_solve(mask, mode, ratio, u, ys, inner_iterations)
        cand = _best_superlevel(u, mask, mode)
        if cand is None or not cand[0] < ratio:
            converged = True
            break
        change = ratio - cand[0]
        ratio, best_set = cand
        history.append(ratio)
        if change < opts.tolerance * ratio:
            converged = True
            break
    h = grid.h
    result = CheegerResult(ratio / h, best_set, k, mode,
                           [r / h for r in history], u, ys)
    if not converged:
        raise CheegerNotConverged("Dinkelbach iteration did not converge", result)
    return result


def cheeger_bruteforce(mask, grid: Grid2D, limit: int = 20) -> CheegerResult:
    """Exact discrete (face-counting) Cheeger constant by enumeration.

    Every nonempty subset of the mask cells is scored by
    ``faces / (cells * h)``; ties go to the smaller area, then to the
    lexicographically smallest sorted list of flat cell indices.
    """
    mask = np.asarray(mask, dtype=bool)
    cells = np.flatnonzero(mask.ravel())
    n = cells.size
    if n == 0:
        raise GeometryError("empty mask")
    if n > limit:
        raise SolverError("oracle bound exceeded")
    pos = {int(c): k for k, c in enumerate(cells)}
    ny = mask.shape[1]
    pairs = []
    for c in cells:
        i, j = divmod(int(c), ny)
        for di, dj in ((1, 0), (0, 1)):
            ii, jj = i + di, j + dj
            if ii < mask.shape[0] and jj < ny and mask[ii, jj]:
                pairs.append((pos[int(c)], pos[ii * ny + jj]))
    S = np.arange(1, 1 << n, dtype=np.int64)
    area = np.zeros(S.size, dtype=np.int64)
    for k in range(n):
        area += (S >> k) & 1
    internal = np.zeros(S.size, dtype=np.int64)
    for a, b in pairs:
        internal += ((S >> a) & (S >> b)) & 1
    faces = 4 * area - 2 * internal
    # exact comparison of faces/area via the smallest value of the fraction
    ratio = faces / area
    rmin = ratio.min()
    cand = np.flatnonzero(ratio <= rmin * (1 + 1e-12))
    f0, a0 = faces[cand], area[cand]
    f_best, a_best = min(zip(f0.tolist(), a0.tolist()),
                         key=lambda fa: (fa[0] / fa[1], fa[1]))
    exact = cand[(f0 * a_best == f_best * a0)]
    exact = exact[area[exact] == area[exact].min()]

    def members(s):
        return [int(cells[k]) for k in range(n) if (int(S[s]) >> k) & 1]

    chosen = min(exact.tolist(), key=members)
    cheeger_set = np.zeros(mask.size, dtype=bool)
    cheeger_set[members(chosen)] = True
    cheeger_set = cheeger_set.reshape(mask.shape)
    h = f_best / (a_best * grid.h)
    return CheegerResult(float(h), cheeger_set, int(S.size), ANISOTROPIC, [float(h)])


def cheeger_convex_oracle(shape) -> float:
    """Euclidean Cheeger constant of a disk or rectangle.

    Disk: ``2 / R``.  Rectangle ``a x b``: ``1 / r`` with ``r`` the root in
    ``(0, min(a, b) / 2)`` of ``(a - 2r)(b - 2r) = pi r^2``, by bisection.
    """
    if isinstance(shape, Disk):
        return 2.0 / shape.radius
    if isinstance(shape, Rectangle):
        a, b = shape.width, shape.height

        def f(r):
            return (a - 2 * r) * (b - 2 * r) - math.pi * r * r

        lo, hi = 0.0, 0.5 * min(a, b)
        while hi - lo > 1e-12 * max(hi, 1e-300) and hi - lo > 1e-15:
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 1.0 / (0.5 * (lo + hi))
    raise GeometryError("convex oracle supports disks and rectangles only")

