"""The scale-invariant ratio F_pq = lambda_p^(1/p) / lambda_q^(1/q) and its checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cheeger import cheeger_dinkelbach
from .eigensolver import SolverOptions, principal_eigen, rayleigh_quotient
from .geometry import ISOTROPIC, Grid2D, inradius, perimeter_area

INF = math.inf


class RegimeError(ValueError):
    """Exponents outside 1 <= q <= p <= inf."""


def parse_exponent(p) -> float:
    if isinstance(p, str):
        p = p.strip().lower()
        if p in ("inf", "infinity", "oo"):
            return INF
    return float(p)


def pi_p(p: float) -> float:
    """Half-period constant: lambda_p of an interval of length L is (pi_p / L)^p."""
    p = parse_exponent(p)
    if not p >= 1:
        raise ValueError("pi_p needs p >= 1")
    if p == 1 or p == INF:
        return 2.0
    return 2.0 * math.pi * (p - 1.0) ** (1.0 / p) / (p * math.sin(math.pi / p))


def q_over_p(p: float, q: float) -> float:
    if p == INF:
        return 1.0 if q == INF else 0.0
    return q / p


@dataclass
class RatioReport:
    p: float
    q: float
    lambda_root_p: float
    lambda_root_q: float
    F: float
    domain: str = ""
    grid: str = ""
    certificates: Dict[float, object] = field(default_factory=dict, repr=False)


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool
    statement: str
    domain: str = ""
    p: float = float("nan")
    q: float = float("nan")

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


@dataclass
class CheckReport:
    rows: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> List[Check]:
        return [r for r in self.rows if not r.passed]

    def extend(self, other: "CheckReport") -> None:
        self.rows.extend(other.rows)


def _root_with_certificate(mask, grid: Grid2D, p: float, opts: SolverOptions,
                           initial=None):
    if p == 1:
        res = cheeger_dinkelbach(mask, grid, ISOTROPIC, opts)
        return res.h, res
    if p == INF:
        return 1.0 / inradius(mask, grid), np.asarray(mask, dtype=bool)
    res = principal_eigen(mask, grid, p, opts, initial=initial)
    return res.root, res


def lambda_root(mask, grid: Grid2D, p, opts: SolverOptions = SolverOptions()) -> float:
    """``lambda_p^(1/p)`` for p in [1, inf].

    p = 1 is the (isotropic) Cheeger constant, p = inf is ``1 / inradius``.
    """
    p = parse_exponent(p)
    if not p >= 1:
        raise RegimeError("p must be >= 1")
    return _root_with_certificate(mask, grid, p, opts)[0]


def ratio_F(mask, grid: Grid2D, p, q, opts: SolverOptions = SolverOptions(),
            domain: str = "", cache: Optional[dict] = None) -> RatioReport:
    """Ratio report for one mask.

    ``cache`` maps exponents to ``(root, certificate)`` pairs already
    computed for this mask and is filled in place.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if not (1 <= q <= p):
        raise RegimeError("regime q ≤ p only")
    cache = {} if cache is None else cache
    for e in (p, q):
        if e not in cache:
            cache[e] = _root_with_certificate(mask, grid, e, opts)
    rp, cp = cache[p]
    rq, cq = cache[q]
    return RatioReport(p, q, rp, rq, rp / rq, domain,
                       f"{grid.nx}x{grid.ny} h={grid.h:.6g}", {p: cp, q: cq})


def root_from_certificate(cert, p: float, grid: Grid2D) -> float:
    """Re-evaluate a root on ``grid`` from a stored minimizer, without solving."""
    if p == 1:
        P, A = perimeter_area(cert.cheeger_set, grid, cert.mode)
        return P / A
    if p == INF:
        return 1.0 / inradius(cert, grid)
    return rayleigh_quotient(cert.eigenfunction.values, p, grid) ** (1.0 / p)


def reevaluate(report: RatioReport, grid: Grid2D) -> RatioReport:
    """Same minimizers, different spacing: the ratio of a rescaled domain."""
    rp = root_from_certificate(report.certificates[report.p], report.p, grid)
    rq = root_from_certificate(report.certificates[report.q], report.q, grid)
    return RatioReport(report.p, report.q, rp, rq, rp / rq, report.domain,
                       f"{grid.nx}x{grid.ny} h={grid.h:.6g}", report.certificates)


def verify_inequalities(report: RatioReport, convex: bool = False, d: int = 2) -> CheckReport:
    """Evaluate the ratio inequalities on a report; failures are recorded."""
    p, q, F = report.p, report.q, report.F
    out = CheckReport()

    def add(name, lhs, rhs, statement):
        out.rows.append(Check(name, float(lhs), float(rhs), bool(lhs >= rhs),
                              statement, report.domain, p, q))

    add("lower_q_over_p", F, q_over_p(p, q), "F_pq >= q/p")
    if p == 2 and q == 1:
        add("cheeger", report.lambda_root_p / report.lambda_root_q, 0.5,
            "sqrt(lambda_2) / h >= 1/2")
    if convex:
        pp, pq = pi_p(p), pi_p(q)
        lower = max(q_over_p(p, q), pp / (d * pq))
        upper = pp * min(q / 2.0, d / pq) if q != INF else pp * d / pq
        add("convex_lower", F, lower, "F_pq >= max(q/p, pi_p/(d pi_q)) for convex sets")
        add("convex_upper", upper, F, "F_pq <= pi_p min(q/2, d/pi_q) for convex sets")
    if p == INF:
        for row in out.rows:
            row.statement += " [p=inf root taken as 1/inradius]"
    return out


def monotonicity_scan(mask, grid: Grid2D, p_list: Sequence[float],
                      opts: SolverOptions = SolverOptions(),
                      cache: Optional[dict] = None) -> List[Tuple[float, float]]:
    """``(p, p * lambda_p^(1/p))`` along an ascending list of finite exponents."""
    ps = [parse_exponent(p) for p in p_list]
    if any(b < a for a, b in zip(ps, ps[1:])):
        raise ValueError("p_list must be ascending")
    if any(p == INF for p in ps):
        raise ValueError("p = inf has no finite value of p * lambda_p^(1/p)")
    if any(p < 1 for p in ps):
        raise RegimeError("p must be >= 1")
    cache = {} if cache is None else cache
    out = []
    for p in ps:
        if p not in cache:
            cache[p] = _root_with_certificate(mask, grid, p, opts)
        out.append((p, p * cache[p][0]))
    return out


def is_nondecreasing(values: Sequence[float], slack: float) -> bool:
    """Each value is at least ``(1 - slack)`` times its predecessor."""
    return all(b >= a * (1.0 - slack) for a, b in zip(values, values[1:]))

