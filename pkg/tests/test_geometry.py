import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheegeropt.geometry import (ANISOTROPIC, ISOTROPIC, Disk, GeometryError,
                                 Polygon, Punctured, Rectangle, ShapeDifference,
                                 ShapeUnion, distance_map, erode, inradius,
                                 largest_component, make_grid, perimeter_area,
                                 rasterize, rescale_spacing)


def test_make_grid_spacing():
    assert make_grid(64, 64, (1, 1)).h == 0.015625
    assert make_grid(2, 2, (1, 1)).h == 0.5


def test_make_grid_rejects_anisotropic_cells():
    with pytest.raises(GeometryError, match="anisotropic"):
        make_grid(64, 32, (1, 1))


def test_rescale_spacing():
    g = make_grid(100, 100, (1, 1))
    assert rescale_spacing(g, 1.0) == g
    assert rescale_spacing(g, 2.0).h == pytest.approx(0.02)
    with pytest.raises(GeometryError):
        rescale_spacing(g, 0.0)


def test_disk_area_within_boundary_band():
    g = make_grid(128, 128, (1, 1))
    m = rasterize(Disk((0.5, 0.5), 0.4), g)
    area = m.sum() * g.h ** 2
    assert abs(area - math.pi * 0.16) <= 2 * g.h * (2 * math.pi * 0.4)


def test_full_rectangle_is_all_true():
    g = make_grid(16, 8, (2, 1))
    assert rasterize(Rectangle((0, 0), 2, 1), g).all()


def test_shape_escaping_box_raises():
    g = make_grid(16, 16, (1, 1))
    with pytest.raises(GeometryError, match="escapes D"):
        rasterize(Disk((0.5, 0.5), 0.6), g)


def test_punctures_remove_single_cells():
    g = make_grid(64, 64, (1, 1))
    base = Disk((0.5, 0.5), 0.45)
    pts = ((0.3, 0.5), (0.5, 0.5), (0.6, 0.6), (0.4, 0.3), (0.5, 0.7))
    full = rasterize(base, g)
    holed = rasterize(Punctured(base, pts), g)
    assert full.sum() - holed.sum() == 5


def test_union_and_difference():
    g = make_grid(32, 32, (1, 1))
    a, b = Rectangle((0, 0), 0.5, 1), Rectangle((0.5, 0), 0.5, 1)
    assert rasterize(ShapeUnion((a, b)), g).all()
    d = rasterize(ShapeDifference(Rectangle((0, 0), 1, 1), a), g)
    assert d.sum() == 16 * 32


def test_polygon_rejects_self_intersection():
    with pytest.raises(GeometryError):
        Polygon(((0, 0), (1, 1), (1, 0), (0, 1)))


def test_perimeter_examples():
    g = make_grid(4, 4, (1, 1))
    assert perimeter_area(np.ones((4, 4), bool), g, ANISOTROPIC) == (4.0, 1.0)
    one = np.zeros((4, 4), bool)
    one[1, 2] = True
    assert perimeter_area(one, g, ANISOTROPIC) == (1.0, 0.0625)


def test_isotropic_circle_perimeter():
    g = make_grid(256, 256, (1, 1))
    P, _ = perimeter_area(rasterize(Disk((0.5, 0.5), 0.4), g), g, ISOTROPIC)
    assert P == pytest.approx(2 * math.pi * 0.4, rel=0.02)


def test_perimeter_of_empty_mask_raises():
    with pytest.raises(GeometryError):
        perimeter_area(np.zeros((4, 4), bool), make_grid(4, 4, (1, 1)))


def test_inradius_examples():
    g = make_grid(256, 256, (1, 1))
    assert abs(inradius(np.ones((256, 256), bool), g) - 0.5) <= g.h
    assert abs(inradius(rasterize(Disk((0.5, 0.5), 0.4), g), g) - 0.4) <= 2 * g.h


def test_inradius_of_centrally_punctured_disk():
    g = make_grid(129, 129, (2.2, 2.2))
    m = rasterize(Punctured(Disk((1.1, 1.1), 1.0), ((1.1, 1.1),)), g)
    r = inradius(m, g)
    assert r < 1.0
    assert r == pytest.approx(0.5, abs=0.03)


def _brute_distance(mask):
    n0, n1 = mask.shape
    outside = [(i, j) for i in range(-1, n0 + 1) for j in range(-1, n1 + 1)
               if not (0 <= i < n0 and 0 <= j < n1 and mask[i, j])]
    out = np.zeros(mask.shape)
    for i, j in zip(*np.nonzero(mask)):
        out[i, j] = min(math.hypot(max(abs(a - i) - 0.5, 0), max(abs(b - j) - 0.5, 0))
                        for a, b in outside)
    return out


@pytest.mark.parametrize("seed", range(8))
def test_distance_map_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(3, 20, size=2))
    mask = rng.random(shape) < rng.uniform(0.6, 0.97)
    g = make_grid(shape[0], shape[1], (float(shape[0]), float(shape[1])))
    np.testing.assert_allclose(distance_map(mask, g), _brute_distance(mask), atol=1e-12)


def test_distance_map_uses_nearest_square_not_nearest_center():
    # offsets (0, 7) and (5, 5): the second square is closer though its center is not
    mask = np.ones((30, 30), bool)
    mask[0, 20] = False
    g = make_grid(30, 30, (30.0, 30.0))
    np.testing.assert_allclose(distance_map(mask, g), _brute_distance(mask), atol=1e-12)


def test_erode_examples():
    g = make_grid(64, 64, (1, 1))
    sq = np.ones((64, 64), bool)
    assert (erode(sq, g, 0) == sq).all()
    area = erode(sq, g, 0.25).sum() * g.h ** 2
    assert abs(area - 0.25) <= 4 * g.h
    disk = rasterize(Disk((0.5, 0.5), 0.4), g)
    assert erode(disk, g, 0.4).sum() <= 1
    with pytest.raises(GeometryError):
        erode(sq, g, -0.1)


def test_largest_component():
    m = np.zeros((10, 10), bool)
    m[0:2, 0:2] = True
    m[5:9, 5:9] = True
    assert largest_component(m).sum() == 16


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.2, 5.0))
def test_perimeter_scales_with_spacing(seed, t):
    rng = np.random.default_rng(seed)
    m = rng.random((12, 9)) < 0.6
    if not m.any():
        m[0, 0] = True
    g = make_grid(12, 9, (12 / 9, 1.0))
    P, A = perimeter_area(m, g, ISOTROPIC)
    Pt, At = perimeter_area(m, rescale_spacing(g, t), ISOTROPIC)
    assert Pt == pytest.approx(t * P, rel=1e-12)
    assert At == pytest.approx(t * t * A, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_area_monotone_under_inclusion(seed):
    rng = np.random.default_rng(seed)
    big = rng.random((10, 10)) < 0.7
    big[0, 0] = True
    small = big & (rng.random((10, 10)) < 0.5)
    small[0, 0] = True
    g = make_grid(10, 10, (1, 1))
    assert perimeter_area(small, g)[1] <= perimeter_area(big, g)[1]
    assert inradius(small, g) <= inradius(big, g)


def test_erosion_inradius_consistency():
    g = make_grid(96, 96, (1, 1))
    m = rasterize(ShapeUnion((Disk((0.35, 0.5), 0.3), Rectangle((0.3, 0.3), 0.6, 0.3))), g)
    rho = inradius(m, g)
    for r in (0.05, 0.1, 0.2):
        e = erode(m, g, r)
        if e.any():
            assert inradius(e, g) >= rho - r - 2 * g.h


def test_disk_area_error_is_first_order():
    # center sampling is not monotone in n, so bound each error by perimeter * h
    for n in (64, 128, 256, 512):
        g = make_grid(n, n, (1, 1))
        err = abs(rasterize(Disk((0.5, 0.5), 0.4), g).sum() * g.h ** 2 - math.pi * 0.16)
        assert err <= 2 * math.pi * 0.4 * g.h


@pytest.mark.parametrize("t", [0.25, 3.0])
def test_inradius_scales_exactly(t):
    g = make_grid(64, 64, (1, 1))
    m = rasterize(Disk((0.5, 0.5), 0.37), g)
    assert inradius(m, rescale_spacing(g, t)) == pytest.approx(t * inradius(m, g), rel=1e-14)
