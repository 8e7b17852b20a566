"""Generalized Cheeger ratios lambda_p^(1/p) / lambda_q^(1/q) on uniform grids."""

__version__ = "0.1.0"

from .geometry import (Disk, GeometryError, Grid2D, Polygon, Punctured, Rectangle,
                       ShapeDifference, ShapeUnion, inradius, make_grid,
                       perimeter_area, rasterize, rescale_spacing)
from .eigensolver import (ScalarField, SolverError, SolverOptions, eigen_1d,
                          gamma_distance, laplacian_eigen_p2, principal_eigen,
                          rayleigh_quotient, torsion)
from .cheeger import cheeger_bruteforce, cheeger_convex_oracle, cheeger_dinkelbach
from .ratio import (CheckReport, RatioReport, RegimeError, lambda_root, pi_p,
                    ratio_F, verify_inequalities)
from .shapeopt import (AnnealOptions, optimize_chains, optimize_mask,
                       optimize_parametric, puncture_experiment,
                       rescale_to_constraint)
from .harness import ExperimentConfig, run_battery, run_cli, run_sweep

__all__ = [
    "Disk", "GeometryError", "Grid2D", "Polygon", "Punctured", "Rectangle",
    "ShapeDifference", "ShapeUnion", "inradius", "make_grid", "perimeter_area",
    "rasterize", "rescale_spacing", "ScalarField", "SolverError", "SolverOptions",
    "eigen_1d", "gamma_distance", "laplacian_eigen_p2", "principal_eigen",
    "rayleigh_quotient", "torsion", "cheeger_bruteforce", "cheeger_convex_oracle",
    "cheeger_dinkelbach", "CheckReport", "RatioReport", "RegimeError", "lambda_root",
    "pi_p", "ratio_F", "verify_inequalities", "AnnealOptions", "optimize_chains",
    "optimize_mask", "optimize_parametric", "puncture_experiment",
    "rescale_to_constraint", "ExperimentConfig", "run_battery", "run_cli", "run_sweep",
]
