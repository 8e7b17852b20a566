import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheegeropt.eigensolver import (SolverError, SolverOptions, eigen_1d,
                                    gamma_distance, laplacian_eigen_p2,
                                    principal_eigen, rayleigh_quotient,
                                    torsion, torsion_energy)
from cheegeropt.geometry import Disk, Rectangle, make_grid, rasterize, rescale_spacing
from cheegeropt.ratio import pi_p

J01_SQ = 2.404825557695773 ** 2


@pytest.mark.parametrize("h", [1.0, 0.1, 0.03])
def test_single_cell_quotient_p2(h):
    u = np.zeros((5, 5))
    u[2, 2] = 1.0
    assert rayleigh_quotient(u, 2, h=h) == pytest.approx(4 * h ** -2, rel=1e-14)


def test_single_cell_quotient_p3():
    # forward differences: the cell itself sees |(-1, -1)|, two neighbours see 1
    u = np.zeros((5, 5))
    u[2, 2] = 1.0
    assert rayleigh_quotient(u, 3, h=1.0) == pytest.approx(2 + 2 ** 1.5, rel=1e-14)


def test_null_candidate_raises():
    with pytest.raises(SolverError, match="null Rayleigh candidate"):
        rayleigh_quotient(np.zeros((4, 4)), 2)


def test_sine_product_quotient():
    n = 256
    g = make_grid(n, n, (1, 1))
    X, Y = g.centers()
    u = np.sin(np.pi * X) * np.sin(np.pi * Y)
    assert rayleigh_quotient(u, 2, g) == pytest.approx(2 * math.pi ** 2, rel=0.01)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(1.1, 6.0), st.floats(0.01, 100.0))
def test_quotient_is_zero_homogeneous(seed, p, c):
    u = np.random.default_rng(seed).random((7, 6))
    assert rayleigh_quotient(c * u, p) == pytest.approx(rayleigh_quotient(u, p), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(1.0, 6.0), st.floats(0.05, 20.0))
def test_quotient_scaling_identity(seed, p, t):
    u = np.random.default_rng(seed).random((8, 8))
    g = make_grid(8, 8, (1, 1))
    base = rayleigh_quotient(u, p, g)
    scaled = rayleigh_quotient(u, p, rescale_spacing(g, t))
    assert scaled == pytest.approx(t ** -p * base, rel=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 5.0])
def test_eigen_1d_matches_closed_form(p):
    assert eigen_1d(1.0, p, 2000) == pytest.approx(pi_p(p) ** p, rel=5e-3)


def test_eigen_1d_examples():
    assert eigen_1d(1.0, 2, 2000) == pytest.approx(math.pi ** 2, rel=1e-3)
    assert eigen_1d(1.0, 3, 2000) == pytest.approx(28.30, rel=5e-3)
    assert eigen_1d(2.0, 2, 2000) == pytest.approx(math.pi ** 2 / 4, rel=1e-3)


def test_p_below_two_uses_other_routes():
    g = make_grid(16, 16, (1, 1))
    with pytest.raises(SolverError, match="lambda_root"):
        principal_eigen(np.ones((16, 16), bool), g, 1.0)


def test_p2_agrees_with_sparse_eigensolver(unit_disk_128):
    mask, g = unit_disk_128
    res = principal_eigen(mask, g, 2)
    assert res.lambda_ == pytest.approx(laplacian_eigen_p2(mask, g), rel=1e-8)
    assert res.lambda_ == pytest.approx(J01_SQ, rel=0.02)


def test_eigen_history_is_monotone(unit_disk_128):
    mask, g = unit_disk_128
    res = principal_eigen(mask, g, 3)
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))
    assert res.eigenfunction.values.min() >= 0
    assert (res.eigenfunction.values[~mask] == 0).all()
    norm = (res.eigenfunction.values ** 3).sum() * g.h ** 2
    assert norm == pytest.approx(1.0, rel=1e-10)


def test_minimizer_rescaling_is_exact(unit_disk_128):
    mask, g = unit_disk_128
    res = principal_eigen(mask, g, 3)
    u = res.eigenfunction.values
    assert rayleigh_quotient(u, 3, rescale_spacing(g, 2.0)) == pytest.approx(
        rayleigh_quotient(u, 3, g) / 8, rel=1e-13)


def test_torsion_disk_half_radius():
    g = make_grid(128, 128, (1, 1))
    mask = rasterize(Disk((0.5, 0.5), 0.5), g)
    w = torsion(mask, g, 2)
    assert w.values.max() == pytest.approx(0.0625, rel=0.02)
    assert w.values.min() >= 0
    assert (w.values[~mask] == 0).all()
    e = w.info["energy_history"]
    assert all(b <= a for a, b in zip(e, e[1:]))


def test_torsion_is_stationary_in_both_directions():
    g = make_grid(48, 48, (1, 1))
    mask = rasterize(Disk((0.5, 0.5), 0.45), g)
    for p in (2.0, 3.0):
        w = torsion(mask, g, p)
        E = torsion_energy(w, p, g)
        rng = np.random.default_rng(0)
        scale = 1e-3 * w.values.max()
        for _ in range(5):
            d = np.where(mask, rng.standard_normal(mask.shape), 0.0) * scale
            assert torsion_energy(w.values + d, p, g) >= E - 1e-12 * abs(E)
            assert torsion_energy(w.values - d, p, g) >= E - 1e-12 * abs(E)


def test_gamma_distance_identity_and_symmetry():
    g = make_grid(48, 48, (2.2, 2.2))
    a = rasterize(Disk((1.1, 1.1), 1.0), g)
    b = rasterize(Disk((1.1, 1.1), 0.5), g)
    assert gamma_distance(a, a, g, 2) <= 1e-6
    assert gamma_distance(a, b, g, 2) == gamma_distance(b, a, g, 2)


def test_solver_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(tolerance=0)


def test_eigenvalue_domain_monotonicity():
    g = make_grid(48, 48, (1, 1))
    big = rasterize(Disk((0.5, 0.5), 0.45), g)
    small = rasterize(Disk((0.45, 0.5), 0.3), g) & big
    opts = SolverOptions()
    for p in (1.5, 2.0, 4.0):
        lb = principal_eigen(big, g, p, opts).lambda_
        ls = principal_eigen(small, g, p, opts).lambda_
        assert ls >= lb * (1 - 2 * opts.tolerance)


def test_torsion_comparison_under_inclusion():
    g = make_grid(48, 48, (1, 1))
    big = rasterize(Disk((0.5, 0.5), 0.45), g)
    small = rasterize(Rectangle((0.2, 0.3), 0.5, 0.4), g) & big
    for p in (2.0, 3.0):
        assert (torsion(small, g, p).values <= torsion(big, g, p).values + 1e-6).all()


def test_torsion_directional_optimality():
    g = make_grid(48, 48, (1, 1))
    mask = rasterize(Disk((0.5, 0.5), 0.45), g)
    rng = np.random.default_rng(11)
    for p in (2.0, 3.0):
        w = torsion(mask, g, p)
        E = torsion_energy(w, p, g)
        inner = mask & (w.values > 0)
        for _ in range(10):
            d = np.where(inner, rng.standard_normal(mask.shape), 0.0) * 1e-4 * w.values.max()
            assert torsion_energy(w.values + d, p, g) >= E - 1e-8 * abs(E)


@pytest.mark.parametrize("p,q", [(2.0, 1.0), (3.0, 2.0), (5.0, 1.5)])
def test_one_dimensional_ratio_is_constant(p, q):
    def root(e, L):
        # the Cheeger constant of an interval of length L is 2 / L
        return 2.0 / L if e == 1 else eigen_1d(L, e, 2000) ** (1 / e)

    for L in (0.5, 1.0, 2.0):
        assert root(p, L) / root(q, L) == pytest.approx(pi_p(p) / pi_p(q), rel=5e-3)
