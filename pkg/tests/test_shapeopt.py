import math

import numpy as np
import pytest

from cheegeropt.eigensolver import principal_eigen
from cheegeropt.geometry import Disk, GeometryError, Rectangle, make_grid, rasterize
from cheegeropt.ratio import INF, RegimeError, ratio_F
from cheegeropt.shapeopt import (AnnealOptions, family_domain, lower_bound_holds,
                                 optimize_chains, optimize_mask,
                                 optimize_parametric, puncture_experiment,
                                 puncture_points, punctured_disk,
                                 rescale_to_constraint)

SQUARE = Rectangle((0.0, 0.0), 1.0, 1.0)


def test_rescale_algebra():
    g = make_grid(16, 16, (1, 1))
    m = np.ones((16, 16), bool)
    t, g2 = rescale_to_constraint(m, g, 2, lam=1 / 16)
    assert t == 0.25 and g2.h == 0.25 * g.h
    assert rescale_to_constraint(m, g, 2, lam=1.0)[1] == g
    with pytest.raises(GeometryError, match="escapes D"):
        rescale_to_constraint(m, g, 2, strict=True, lam=16.0)


def test_rescaled_eigenvalue_is_one():
    g = make_grid(32, 32, (1, 1))
    m = rasterize(Disk((0.5, 0.5), 0.4), g)
    t, g2 = rescale_to_constraint(m, g, 3)
    assert principal_eigen(m, g2, 3).lambda_ == pytest.approx(1.0, abs=0.01)


def test_zero_steps_returns_initial_mask():
    g = make_grid(48, 48, (1, 1))
    disk = rasterize(Disk((0.5, 0.5), 0.45), g)
    res = optimize_mask(SQUARE, g, 2, 1, AnnealOptions(steps=0), initial=disk)
    assert res.best_F == ratio_F(disk, g, 2, 1).F
    assert (res.best_mask == disk).all()
    assert res.lambda_p_rescaled == pytest.approx(1.0, abs=0.01)


def _short_run(seed):
    g = make_grid(24, 24, (1, 1))
    return optimize_mask(SQUARE, g, 2, 1, AnnealOptions(steps=40, seed=seed), initial="blob")


def test_annealing_trace_properties():
    res = _short_run(7)
    best = [r.best_F for r in res.trace]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert res.best_F == best[-1] == min(r.F for r in res.trace if r.accepted)
    assert res.best_F <= res.trace[0].F
    assert lower_bound_holds(res.trace, 2, 1)
    assert not res.degenerate


def test_annealing_is_reproducible():
    a, b = _short_run(3), _short_run(3)
    assert [(r.F, r.accepted) for r in a.trace] == [(r.F, r.accepted) for r in b.trace]
    assert (a.best_mask == b.best_mask).all()


def test_annealing_regime():
    g = make_grid(16, 16, (1, 1))
    with pytest.raises(RegimeError):
        optimize_mask(SQUARE, g, 1, 2)


def test_chains_independent_of_workers():
    g = make_grid(20, 20, (1, 1))
    opts = AnnealOptions(steps=10)
    one = optimize_chains(SQUARE, g, 2, 1, [1, 2], opts, workers=1)
    two = optimize_chains(SQUARE, g, 2, 1, [1, 2], opts, workers=2)
    assert one.best_F == two.best_F
    assert (one.best_mask == two.best_mask).all()


def test_rectangle_family_fills_grid():
    mask, g, realized = family_domain("rectangle", 0.2, 100)
    assert mask.all() and g.shape == (100, 20) and realized == 0.2


def test_ellipse_aspect_one_is_disk():
    mask, g, _ = family_domain("ellipse", 1.0, 128)
    assert ratio_F(mask, g, 2, 1).F == pytest.approx(1.2024, rel=0.03)


def test_parametric_search_prefers_square():
    res = optimize_parametric("rectangle", 2, 1, resolution=48, bounds=(0.3, 1.0),
                              tol=0.05, max_evals=8)
    assert res.best_parameter > 0.8
    with pytest.raises(ValueError):
        optimize_parametric("rectangle", 2, 1, bounds=(0.5, 0.2))


def test_puncture_points_are_nested():
    a = puncture_points(5, seed=4)
    b = puncture_points(9, seed=4)
    assert a == b[:5]
    assert all(math.hypot(x - 1.1, y - 1.1) <= 0.9 for x, y in b)
    with pytest.raises(ValueError):
        puncture_points(-1, seed=0)


def test_punctured_disk_hole_count():
    full, _ = punctured_disk(0, 96, 0)
    holed, _ = punctured_disk(6, 96, 0)
    assert 1 <= full.sum() - holed.sum() <= 6


def test_puncture_series_increases():
    series = puncture_experiment([0, 5, 20], INF, 2, resolution=96)
    F = [f for _, f in series]
    assert all(b > a for a, b in zip(F, F[1:]))
    with pytest.raises(ValueError):
        puncture_experiment([-1], INF, 1, resolution=32)
    with pytest.raises(RegimeError):
        puncture_experiment([0], 2, 3, resolution=32)
