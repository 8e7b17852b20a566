"""Flat-file outputs: plain graymaps, CSV tables and key=value manifests.

CSV files are comma separated with LF endings and a header row whose
column names carry units in brackets where a quantity has them.
"""

from __future__ import annotations

import math
import os
from typing import Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .geometry import GeometryError, Grid2D


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    s = str(v)
    if "\n" in s:
        raise ValueError(f"CSV value may not contain newlines: {s!r}")
    # values are never quoted, so commas inside labels become semicolons
    return s.replace(",", ";")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path: str) -> Tuple[List[str], List[List[str]]]:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


# -- grids and masks --------------------------------------------------------

def grid_header(grid: Grid2D) -> List[str]:
    return [f"nx={grid.nx}", f"ny={grid.ny}", f"h={grid.h!r}",
            f"ox={grid.origin[0]!r}", f"oy={grid.origin[1]!r}"]


def parse_grid_header(lines: Iterable[str]) -> Grid2D:
    kv = {}
    for ln in lines:
        ln = ln.strip().lstrip("#").strip()
        if "=" in ln:
            k, v = ln.split("=", 1)
            kv[k.strip()] = v.strip()
    try:
        return Grid2D(int(kv["nx"]), int(kv["ny"]), float(kv["h"]),
                      (float(kv.get("ox", 0.0)), float(kv.get("oy", 0.0))))
    except KeyError as exc:
        raise GeometryError(f"grid header lacks {exc.args[0]}") from None


def _pgm_rows(a: np.ndarray) -> np.ndarray:
    # image rows run top to bottom, so the largest y comes first
    return a.T[::-1]


def write_mask_pgm(path: str, mask: np.ndarray, grid: Grid2D = None) -> None:
    """Plain graymap ("P2", maxval 1); the grid goes into comment lines."""
    mask = np.asarray(mask, dtype=bool)
    rows = _pgm_rows(mask.astype(np.uint8))
    with open(path, "w", newline="\n") as fh:
        fh.write("P2\n")
        if grid is not None:
            for ln in grid_header(grid):
                fh.write(f"# {ln}\n")
        fh.write(f"{mask.shape[0]} {mask.shape[1]}\n1\n")
        for r in rows:
            fh.write(" ".join(map(str, r.tolist())) + "\n")


def _read_pgm(path: str):
    comments, tokens = [], []
    with open(path) as fh:
        for ln in fh:
            if ln.lstrip().startswith("#"):
                comments.append(ln.strip())
                continue
            tokens.extend(ln.split())
    if not tokens or tokens[0] != "P2":
        raise GeometryError(f"{path}: not a plain graymap")
    w, hgt, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.array(tokens[4:4 + w * hgt], dtype=np.int64)
    if vals.size != w * hgt:
        raise GeometryError(f"{path}: truncated graymap")
    a = vals.reshape(hgt, w)[::-1].T
    return a, maxval, comments


def read_mask_pgm(path: str):
    """Returns ``(mask, grid or None)``."""
    a, maxval, comments = _read_pgm(path)
    grid = None
    if any("nx=" in c for c in comments):
        grid = parse_grid_header(comments)
        if grid.shape != a.shape:
            raise GeometryError(f"{path}: header grid does not match the image")
    return a >= max(1, (maxval + 1) // 2), grid


def write_field_pgm(path: str, values: np.ndarray, grid: Grid2D = None) -> None:
    """16-bit plain graymap, linear between the min and max noted in comments."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    scale = 65535.0 / (hi - lo) if hi > lo else 0.0
    q = np.rint((v - lo) * scale).astype(np.int64)
    with open(path, "w", newline="\n") as fh:
        fh.write("P2\n")
        fh.write(f"# min={lo!r}\n# max={hi!r}\n")
        if grid is not None:
            for ln in grid_header(grid):
                fh.write(f"# {ln}\n")
        fh.write(f"{v.shape[0]} {v.shape[1]}\n65535\n")
        for r in _pgm_rows(q):
            fh.write(" ".join(map(str, r.tolist())) + "\n")


def read_field_pgm(path: str) -> np.ndarray:
    a, maxval, comments = _read_pgm(path)
    kv = dict(c.lstrip("#").strip().split("=", 1) for c in comments if "=" in c)
    lo, hi = float(kv.get("min", 0.0)), float(kv.get("max", 1.0))
    return lo + a.astype(float) * (hi - lo) / maxval


def write_field_csv(path: str, values: np.ndarray, grid: Grid2D,
                    name: str = "value") -> None:
    X, Y = grid.centers()
    v = np.asarray(values, dtype=float)
    write_csv(path, ["x[length]", "y[length]", name],
              zip(X.ravel().tolist(), Y.ravel().tolist(), v.ravel().tolist()))


# -- result tables ----------------------------------------------------------

def write_history_csv(path: str, history: Sequence[float],
                      name: str = "h[1/length]") -> None:
    write_csv(path, ["iteration", name], enumerate(history))


CHECK_HEADER = ["check", "domain", "p", "q", "lhs[dimensionless]",
                "rhs[dimensionless]", "margin[dimensionless]", "pass"]


def write_checks_csv(path: str, report) -> None:
    write_csv(path, CHECK_HEADER,
              ([r.name, r.domain, r.p, r.q, r.lhs, r.rhs, r.margin, r.passed]
               for r in report.rows))


TRACE_HEADER = ["step", "F[dimensionless]", "accepted",
                "temperature[dimensionless]", "best_F[dimensionless]"]


def write_trace_csv(path: str, trace) -> None:
    write_csv(path, TRACE_HEADER,
              ([t.step, t.F, t.accepted, t.temperature, t.best_F] for t in trace))


REPORT_HEADER = ["domain", "p", "q", "lambda_root_p[1/length]",
                 "lambda_root_q[1/length]", "F[dimensionless]", "checks_passed"]


def write_manifest(path: str, entries: Mapping[str, object]) -> None:
    with open(path, "w", newline="\n") as fh:
        for k, v in entries.items():
            items = v if isinstance(v, (list, tuple)) else [v]
            for item in items:
                fh.write(f"{k}={item}\n")


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory not writable: {path}")
    return path
