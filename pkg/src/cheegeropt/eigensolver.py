"""Principal Dirichlet eigenvalues of the p-Laplacian and p-torsion functions.

The discrete Rayleigh quotient of a cell field ``u`` (zero outside the mask)
is

    R_p(u) = sum_c |grad u(c)|^p h^2 / sum_c |u(c)|^p h^2,

where ``grad u(c) = (u(c+ex) - u(c), u(c+ey) - u(c)) / h`` is the forward
difference with zero padding, summed over every cell whose stencil touches
the mask.  Solvers work in grid units (h = 1) and convert at the end, so
rescaling the spacing by ``t`` multiplies every computed eigenvalue by
exactly ``t**-p``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh, spsolve

from . import _descent
from .geometry import GeometryError, Grid2D

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """A solver failed or was called outside its domain."""


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 50000
    tolerance: float = 1e-8
    seed: int = 0
    continuation: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class ScalarField:
    values: np.ndarray
    grid: Grid2D
    mask: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.where(self.mask, self.values, 0.0)
        if not np.all(np.isfinite(self.values)):
            raise SolverError("non-finite field values")


@dataclass
class EigenResult:
    lambda_: float
    eigenfunction: ScalarField
    iterations: int
    residual: float
    p: float
    history: list = field(default_factory=list)

    @property
    def root(self) -> float:
        """``lambda ** (1/p)``, the quantity entering the ratio functional."""
        return self.lambda_ ** (1.0 / self.p)


# -- discrete operators (grid units) ---------------------------------------

def _pad(u: np.ndarray) -> np.ndarray:
    return np.pad(u, 1)


def _diffs(P: np.ndarray):
    if P.ndim == 1:
        return (P[1:] - P[:-1],)
    return (P[1:, :-1] - P[:-1, :-1], P[:-1, 1:] - P[:-1, :-1])


def _scatter(comps, shape) -> np.ndarray:
    """Adjoint of ``_diffs`` restricted to the interior cells."""
    G = np.zeros(tuple(n + 2 for n in shape))
    if len(shape) == 1:
        (a,) = comps
        G[:-1] -= a
        G[1:] += a
        return G[1:-1]
    a, b = comps
    G[:-1, :-1] -= a + b
    G[1:, :-1] += a
    G[:-1, 1:] += b
    return G[1:-1, 1:-1]


def _grad_norm2(comps) -> np.ndarray:
    out = comps[0] ** 2
    for c in comps[1:]:
        out = out + c ** 2
    return out


def _pow_weight(norm2: np.ndarray, e: float) -> np.ndarray:
    """``|g|**e`` from ``|g|**2``, with 0 where ``g`` vanishes and ``e < 0``."""
    if e >= 0:
        return norm2 ** (0.5 * e)
    out = np.zeros_like(norm2)
    nz = norm2 > 0
    out[nz] = norm2[nz] ** (0.5 * e)
    return out


def dirichlet_energy(u: np.ndarray, p: float, grad: bool = False):
    """``sum |grad u|^p`` in grid units, optionally with its gradient."""
    comps = _diffs(_pad(u))
    n2 = _grad_norm2(comps)
    val = float((n2 ** (0.5 * p)).sum())
    if not grad:
        return val
    w = p * _pow_weight(n2, p - 2.0)
    return val, _scatter([w * c for c in comps], u.shape)


def _weighted_laplacian(mask: np.ndarray, weights: np.ndarray) -> sp.csr_matrix:
    """Edge Laplacian over mask cells; Dirichlet ghosts eliminated.

    ``weights`` lives on the same (n+1)-per-axis cell set as ``_diffs`` and
    weights both forward edges leaving each cell.
    """
    idx = -np.ones(tuple(n + 2 for n in mask.shape), dtype=np.int64)
    n = int(mask.sum())
    if mask.ndim == 1:
        idx[1:-1][mask] = np.arange(n)
        pairs = [(idx[:-1], idx[1:])]
    else:
        idx[1:-1, 1:-1][mask] = np.arange(n)
        pairs = [(idx[:-1, :-1], idx[1:, :-1]), (idx[:-1, :-1], idx[:-1, 1:])]
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    for a, b in pairs:
        a = a.ravel()
        b = b.ravel()
        w = weights.ravel()
        for s in (a, b):
            keep = s >= 0
            np.add.at(diag, s[keep], w[keep])
        both = (a >= 0) & (b >= 0)
        rows += [a[both], b[both]]
        cols += [b[both], a[both]]
        vals += [-w[both], -w[both]]
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


def _precond_factory(mask: np.ndarray, p: float, scale: float = 1.0):
    def build(x):
        if p == 2.0:
            weights = np.ones(tuple(n + 1 for n in mask.shape))
        else:
            u = np.zeros(mask.shape)
            u[mask] = x
            n2 = _grad_norm2(_diffs(_pad(u)))
            delta2 = max(1e-6 * float(n2.max()), 1e-300)
            weights = (p - 1.0) * (n2 + delta2) ** (0.5 * (p - 2.0))
        return _weighted_laplacian(mask, scale * weights)
    return build


def _check_p(p: float) -> float:
    p = float(p)
    if not (1.0 < p < np.inf):
        raise SolverError("p must satisfy 1 < p < inf; use cheeger / lambda_root")
    return p


def _check_mask(mask, grid: Optional[Grid2D] = None) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise GeometryError("empty mask")
    if grid is not None and mask.shape != grid.shape:
        raise GeometryError(f"mask shape {mask.shape} does not match grid {grid.shape}")
    return mask


# -- Rayleigh quotient ------------------------------------------------------

def rayleigh_quotient(u, p: float, grid: Optional[Grid2D] = None,
                      h: Optional[float] = None) -> float:
    """Discrete p-Rayleigh quotient of a field.

    ``u`` is a :class:`ScalarField` or an array (1-D or 2-D) that is zero
    outside its domain; the spacing comes from the field, ``grid`` or ``h``.
    """
    if isinstance(u, ScalarField):
        grid = u.grid
        u = u.values
    u = np.asarray(u, dtype=float)
    if h is None:
        h = grid.h if grid is not None else 1.0
    p = float(p)
    if not (1.0 <= p < np.inf):
        raise SolverError("rayleigh_quotient needs 1 <= p < inf")
    den = float((np.abs(u) ** p).sum())
    if den == 0.0:
        raise SolverError("null Rayleigh candidate")
    return dirichlet_energy(u, p) / den * h ** (-p)


def _quotient_problem(mask: np.ndarray, p: float):
    shape = mask.shape

    def fun(x):
        u = np.zeros(shape)
        u[mask] = x
        num, gnum = dirichlet_energy(u, p, grad=True)
        ax = np.abs(x)
        den = float((ax ** p).sum())
        gden = p * ax ** (p - 1.0) * np.sign(x)
        r = num / den
        return r, (gnum[mask] - r * gden) / den

    def renormalize(x):
        x = np.abs(x)
        return x / float((x ** p).sum()) ** (1.0 / p)

    return fun, renormalize


def _solve_quotient(mask: np.ndarray, p: float, opts: SolverOptions,
                    x0: Optional[np.ndarray]) -> _descent.DescentResult:
    fun, renorm = _quotient_problem(mask, p)
    if x0 is None:
        rng = np.random.default_rng(opts.seed)
        x0 = rng.uniform(0.5, 1.5, int(mask.sum()))
    x0 = renorm(np.maximum(np.asarray(x0, dtype=float), 0.0) + 1e-12)
    return _descent.minimize(fun, x0, _precond_factory(mask, p), tol=opts.tolerance,
                             max_iter=opts.max_iterations, post_step=renorm)


def principal_eigen(mask, grid: Grid2D, p: float,
                    opts: SolverOptions = SolverOptions(),
                    initial: Optional[np.ndarray] = None) -> EigenResult:
    """First Dirichlet eigenvalue of the p-Laplacian on a mask.

    Minimizes the discrete Rayleigh quotient by monotone descent with
    nonnegativity projection and p-norm renormalization every step.  The
    returned eigenvalue is the final quotient, an upper bound for the
    discrete minimum.  ``initial`` (a field on the grid) warm-starts the
    iteration; otherwise the start is a seeded positive random field, or the
    p = 2 minimizer when ``opts.continuation`` is set.
    """
    p = _check_p(p)
    mask = _check_mask(mask, grid)
    x0 = None
    iters = 0
    if initial is not None:
        x0 = np.asarray(initial, dtype=float)[mask]
        if not np.any(x0 > 0):
            x0 = None
    if x0 is None and opts.continuation and p != 2.0:
        warm = _solve_quotient(mask, 2.0, opts, None)
        x0 = warm.x
        iters += warm.iterations
    res = _solve_quotient(mask, p, opts, x0)
    iters += res.iterations
    if not res.converged:
        log.warning("principal_eigen: max_iterations reached (p=%g)", p)
    lam = res.value * grid.h ** (-p)
    u = np.zeros(mask.shape)
    u[mask] = res.x
    u /= (float((u ** p).sum()) * grid.h ** 2) ** (1.0 / p)
    residual = res.grad_norm * float(np.linalg.norm(res.x)) / res.value
    field_ = ScalarField(u, grid, mask, {"converged": res.converged})
    return EigenResult(lam, field_, iters, residual, p,
                       [v * grid.h ** (-p) for v in res.history])


def laplacian_eigen_p2(mask, grid: Grid2D) -> float:
    """Smallest eigenvalue of the 5-point Dirichlet Laplacian on the mask.

    Same discrete problem as ``principal_eigen(p=2)`` solved by a sparse
    shift-invert Lanczos iteration; used as an independent cross-check.
    """
    mask = _check_mask(mask, grid)
    A = _weighted_laplacian(mask, np.ones(tuple(n + 1 for n in mask.shape)))
    if A.shape[0] == 1:
        return float(A[0, 0]) / grid.h ** 2
    if A.shape[0] < 64:
        return float(np.linalg.eigvalsh(A.toarray())[0]) / grid.h ** 2
    vals = eigsh(A.tocsc(), k=1, sigma=0.0, which="LM", return_eigenvectors=False)
    return float(vals[0]) / grid.h ** 2


# -- one dimension ----------------------------------------------------------

def eigen_1d(L: float, p: float, n: int,
             opts: SolverOptions = SolverOptions()) -> float:
    """First Dirichlet eigenvalue of the p-Laplacian on an interval of length L.

    ``n`` interior nodes with zero endpoint values, spacing ``L / (n + 1)``.
    """
    p = _check_p(p)
    if not L > 0:
        raise SolverError("interval length must be positive")
    if int(n) < 16:
        raise SolverError("eigen_1d needs at least 16 interior nodes")
    n = int(n)
    h = L / (n + 1)
    mask = np.ones(n, dtype=bool)
    x0 = np.sin(np.pi * np.arange(1, n + 1) / (n + 1))
    res = _solve_quotient(mask, p, opts, x0)
    return res.value * h ** (-p)


# -- torsion ----------------------------------------------------------------

def _torsion_problem(mask: np.ndarray, p: float):
    shape = mask.shape

    def fun(x):
        u = np.zeros(shape)
        u[mask] = x
        e, g = dirichlet_energy(u, p, grad=True)
        return e / p - float(x.sum()), g[mask] / p - 1.0

    return fun


def torsion_energy(w, p: float, grid: Grid2D) -> float:
    """``(1/p) sum |grad w|^p h^2 - sum w h^2`` for a field on ``grid``."""
    w = np.asarray(w.values if isinstance(w, ScalarField) else w, dtype=float)
    h = grid.h
    return dirichlet_energy(w, p) * h ** (2.0 - p) / p - float(w.sum()) * h ** 2


def torsion(mask, grid: Grid2D, p: float,
            opts: SolverOptions = SolverOptions()) -> ScalarField:
    """p-torsion function: minimizer of the discrete torsion energy.

    Solves ``-Delta_p w = 1`` in the mask, ``w = 0`` outside.  The result is
    clamped at zero; ``info`` carries the clamp magnitude, the energy trace
    and the positivity set ``{w > 1e-10}``.
    """
    p = _check_p(p)
    mask = _check_mask(mask, grid)
    fun = _torsion_problem(mask, p)
    A = _weighted_laplacian(mask, np.ones(tuple(n + 1 for n in mask.shape)))
    v2 = spsolve(A.tocsc(), np.ones(A.shape[0]))
    v2 = np.atleast_1d(v2)
    if p == 2.0:
        x0 = v2
    else:
        u = np.zeros(mask.shape)
        u[mask] = v2
        N = dirichlet_energy(u, p)
        x0 = v2 * (float(v2.sum()) / N) ** (1.0 / (p - 1.0))
    res = _descent.minimize(fun, x0, _precond_factory(mask, p), tol=opts.tolerance,
                            max_iter=opts.max_iterations,
                            gtol=1e-12 * np.sqrt(x0.size))
    # grid units -> physical: w = h^(p/(p-1)) v
    scale = grid.h ** (p / (p - 1.0))
    clamp = float(max(0.0, -res.x.min()))
    x = np.maximum(res.x, 0.0)
    w = np.zeros(mask.shape)
    w[mask] = x * scale
    escale = grid.h ** ((3.0 * p - 2.0) / (p - 1.0))
    info = {
        "clamp": clamp * scale,
        "iterations": res.iterations,
        "energy_history": [e * escale for e in res.history],
        "converged": res.converged,
        "support": w > 1e-10,
    }
    return ScalarField(w, grid, mask, info)


def gamma_distance(maskA, maskB, grid: Grid2D, p: float,
                   opts: SolverOptions = SolverOptions()) -> float:
    """L^p distance between the p-torsion functions of two masks."""
    p = _check_p(p)
    maskA = _check_mask(maskA, grid)
    maskB = _check_mask(maskB, grid)
    wa = torsion(maskA, grid, p, opts).values
    wb = torsion(maskB, grid, p, opts).values
    return float((np.abs(wa - wb) ** p).sum() * grid.h ** 2) ** (1.0 / p)
