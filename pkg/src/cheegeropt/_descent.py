"""Monotone descent loop shared by the eigenvalue and torsion solvers.

Directions come from a limited-memory quasi-Newton recursion whose initial
inverse Hessian is a (weighted) grid Laplacian solve; every step is accepted
by Armijo backtracking, so the objective never increases.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.sparse.linalg import splu


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    iterations: int
    grad_norm: float
    history: List[float] = field(default_factory=list)
    converged: bool = False


def minimize(fun: Callable, x0: np.ndarray, precond: Callable,
             tol: float = 1e-8, max_iter: int = 50000,
             post_step: Optional[Callable] = None, memory: int = 8,
             refresh: int = 25, patience: int = 3,
             gtol: float = 0.0) -> DescentResult:
    """Minimize ``fun`` (returning value and gradient) from ``x0``.

    ``precond(x)`` returns a sparse SPD matrix approximating the Hessian at
    ``x``; it is refactored every ``refresh`` iterations.  ``post_step(x)``
    maps a trial point to the point actually used (projection and
    renormalization); it must not increase ``fun``.  Stops after
    ``patience`` consecutive steps with relative decrease below ``tol``, or
    when the gradient norm drops below ``gtol``.
    """
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    history = [f]
    mem: deque = deque(maxlen=memory)
    lu = splu(precond(x).tocsc())
    quiet = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if it % refresh == 0:
            lu = splu(precond(x).tocsc())
            mem.clear()
        d = _direction(g, mem, lu)
        slope = float(g @ d)
        if not slope < 0:
            mem.clear()
            d = -lu.solve(g)
            slope = float(g @ d)
            if not slope < 0:
                converged = True
                break

        alpha = 1.0
        accepted = False
        for _ in range(60):
            trial = x + alpha * d
            if post_step is not None:
                trial = post_step(trial)
            ft, gt = fun(trial)
            if np.isfinite(ft) and ft <= f + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted or ft > f:
            converged = True
            break

        s = trial - x
        y = gt - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            mem.append((s, y, 1.0 / sy))
        change = (f - ft) / max(abs(ft), 1e-300)
        x, f, g = trial, ft, gt
        history.append(f)
        quiet = quiet + 1 if change < tol else 0
        if quiet >= patience or (gtol > 0 and np.linalg.norm(g) < gtol):
            converged = True
            break
    return DescentResult(x, f, it, float(np.linalg.norm(g)), history, converged)


def _direction(g, mem, lu):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(mem):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if mem:
        s, y, _ = mem[-1]
        Hy = lu.solve(y)
        gamma = float(s @ y) / float(y @ Hy)
    else:
        gamma = 1.0
    r = gamma * lu.solve(q)
    for (s, y, rho), a in zip(mem, reversed(alphas)):
        b = rho * float(y @ r)
        r += (a - b) * s
    return -r
