"""Inequality ratio scans: exact structural checks and ensemble quotients."""

import numpy as np
import pytest

from prodnls.grid import GridError, make_grid
from prodnls.scans import (
    AliasingError,
    algebra_ratio,
    algebra_scan,
    band_limit_x,
    derivative_strichartz_scan,
    leibniz_residual,
    mixed_estimate_scan,
    strichartz_scan,
    trilinear_ratio,
    trilinear_scan,
    x_only_random,
    y_only_random,
)
from prodnls.sobolev import SobolevSpec, random_small_data
from prodnls.spacetime import Trajectory, free_trajectory, mixed_norm

from conftest import pure_mode


class TestStrichartzScan:
    def test_modulation_uniformity_exact(self, grid2):
        res = strichartz_scan(grid2, 4.0, 4.0, samples=3, seed=0, final_time=2.0, n_times=17)
        assert res.extras["m_independent"]
        assert res.extras["modulation_spread"] <= 1e-12

    def test_ratios_finite_and_positive(self, grid2):
        res = strichartz_scan(grid2, 4.0, 4.0, samples=5, seed=1, final_time=2.0, n_times=17)
        assert len(res.ratios) == 10  # homogeneous + inhomogeneous per sample
        assert all(np.isfinite(r) and r > 0 for r in res.ratios)
        assert res.max_ratio == max(res.ratios)

    def test_deterministic_in_seed(self, grid2):
        a = strichartz_scan(grid2, 4.0, 4.0, samples=3, seed=7, final_time=1.0, n_times=9)
        b = strichartz_scan(grid2, 4.0, 4.0, samples=3, seed=7, final_time=1.0, n_times=9)
        assert a.ratios == b.ratios

    def test_ratio_scale_invariance(self, grid2):
        """Both sides are 1-homogeneous: the flow-to-datum quotient cannot see
        the datum's normalization."""
        times = np.linspace(0, 2, 17)
        f = random_small_data(grid2, SobolevSpec(0, 0.6), 1.0, seed=3)
        r1 = mixed_norm(free_trajectory(f, times), 4.0, 4.0) / f.l2_norm()
        g = f * 37.5
        r2 = mixed_norm(free_trajectory(g, times), 4.0, 4.0) / g.l2_norm()
        assert r2 == pytest.approx(r1, rel=1e-12)

    def test_inadmissible_pair_rejected(self, grid2):
        with pytest.raises(Exception):
            strichartz_scan(grid2, 2.0, 4.0, samples=1)


class TestDerivativeScan:
    def test_n4_order_one(self):
        grid = make_grid(4, 1, 4 * np.pi, 8, 4)
        res = derivative_strichartz_scan(grid, (1, 0, 0, 0), 4.0, 16 / 6, samples=3, seed=0, final_time=1.0, n_times=9)
        assert all(np.isfinite(r) for r in res.ratios)

    def test_alpha_order_capped(self):
        grid = make_grid(4, 1, 4 * np.pi, 8, 4)
        with pytest.raises(GridError):
            derivative_strichartz_scan(grid, (1, 1, 0, 0), 4.0, 16 / 6, samples=1)

    def test_odd_n_rejected(self, grid3):
        with pytest.raises(GridError):
            derivative_strichartz_scan(grid3, (0, 0, 0), 4.0, 4.0, samples=1)

    def test_n2_reduces_to_plain_relation(self, grid2):
        # alpha = 0 at n=2: the derivative relation coincides with the plain one
        res = derivative_strichartz_scan(grid2, (0, 0), 4.0, 4.0, samples=2, seed=0, final_time=1.0, n_times=9)
        assert all(np.isfinite(r) for r in res.ratios)


class TestMixedScan:
    def test_reduction_to_r_zero_exact(self, grid2):
        res = mixed_estimate_scan(grid2, (0, 0), 1.1, 4.0, 4.0, samples=4, seed=0, final_time=1.0, n_times=9)
        assert res.extras["reduction_gap"] <= 1e-12

    def test_r_zero_matches_plain_product_scan(self, grid2):
        res = mixed_estimate_scan(grid2, (0, 0), 0.0, 4.0, 4.0, samples=3, seed=5, final_time=1.0, n_times=9)
        assert all(np.isfinite(r) for r in res.ratios)

    def test_negative_r_rejected(self, grid2):
        with pytest.raises(GridError):
            mixed_estimate_scan(grid2, (0, 0), -1.0, 4.0, 4.0, samples=1)


class TestAlgebra:
    def test_dc_modes_closed_form(self):
        """Three constants: || (2 pi)^{-k} || comes from the product of three
        L^2-normalized constants having L^2 norm (2 pi)^{-k} times theirs."""
        modes, k = 8, 1
        one = np.zeros((modes,), complex)
        one[0] = 1.0
        ratio = algebra_ratio(one, one, one, 0.6, modes, k)
        assert ratio == pytest.approx((2 * np.pi) ** (-k), rel=1e-12)

    def test_scale_invariance(self):
        modes, k = 8, 1
        f1 = y_only_random(modes, k, 1)
        one = np.zeros((modes,), complex)
        one[0] = 1.0
        r1 = algebra_ratio(f1, one, one, 0.6, modes, k)
        r2 = algebra_ratio(f1 * 11.0, one, one, 0.6, modes, k)
        assert r2 == pytest.approx(r1, rel=1e-12)

    def test_zero_factor_rejected(self):
        modes, k = 8, 1
        zero = np.zeros((modes,), complex)
        with pytest.raises(ZeroDivisionError):
            algebra_ratio(zero, zero, zero, 0.6, modes, k)

    def test_scan_runs(self):
        res = algebra_scan(16, 1, 0.6, samples=10, seed=0)
        assert all(np.isfinite(r) for r in res.ratios)


class TestLeibniz:
    def test_zero_index_residual_zero(self):
        grid = make_grid(2, 1, 4 * np.pi, 16, 4)
        hs = [band_limit_x(x_only_random(grid, j), grid, 2) for j in range(3)]
        assert leibniz_residual(hs[0], hs[1], hs[2], (0, 0), grid) == 0.0

    def test_two_constant_factors_reduce_to_linearity(self):
        grid = make_grid(2, 1, 4 * np.pi, 16, 4)
        g1 = band_limit_x(x_only_random(grid, 0), grid, 2)
        const = np.zeros((16, 16), complex)
        const[0, 0] = 1.0
        assert leibniz_residual(g1, const, const, (1, 0), grid) <= 1e-12

    def test_random_band_limited_triple(self):
        grid = make_grid(4, 1, 4 * np.pi, 8, 4)
        hs = [band_limit_x(x_only_random(grid, 10 + j), grid, 1) for j in range(3)]
        assert leibniz_residual(hs[0], hs[1], hs[2], (1, 0, 0, 0), grid) <= 1e-10

    def test_second_order_multi_axis(self):
        grid = make_grid(2, 1, 4 * np.pi, 32, 4)
        hs = [band_limit_x(x_only_random(grid, 20 + j), grid, 4) for j in range(3)]
        assert leibniz_residual(hs[0], hs[1], hs[2], (1, 1), grid) <= 1e-10

    def test_full_band_inputs_rejected(self):
        grid = make_grid(2, 1, 4 * np.pi, 8, 4)
        hs = [x_only_random(grid, 30 + j) for j in range(3)]
        with pytest.raises(AliasingError):
            leibniz_residual(hs[0], hs[1], hs[2], (1, 0), grid)


class TestTrilinear:
    def test_zero_factor_rejected(self, grid2):
        times = np.linspace(0, 1, 5)
        zero = Trajectory(grid2, times, np.zeros((5,) + grid2.shape, complex))
        with pytest.raises(ZeroDivisionError):
            trilinear_ratio(zero, zero, zero, 0.1)

    def test_separable_pure_mode_closed_form(self):
        """Identical time-constant pure modes: every norm separates, leaving
        ratio = w(3 m) / (w(m)^3 (2 pi)^k) with w the smoothing weight."""
        grid = make_grid(2, 1, 8 * np.pi, 16, 8)
        eps = 0.1
        m_idx = 1
        u = pure_mode(grid, (1, 1), (m_idx,), amplitude=0.3)
        times = np.linspace(0, 2, 9)
        traj = Trajectory(grid, times, np.repeat(u.coeffs[None], 9, axis=0))
        got = trilinear_ratio(traj, traj, traj, eps, variant="even")
        expo = (grid.k / 2 + eps) / 2
        w1 = (1 + m_idx**2) ** expo
        w3 = (1 + (3 * m_idx) ** 2) ** expo
        expected = w3 / (w1**3 * (2 * np.pi) ** grid.k)
        assert got == pytest.approx(expected, rel=1e-8)

    def test_scale_invariance(self, grid2):
        times = np.linspace(0, 1, 9)
        us = [free_trajectory(random_small_data(grid2, SobolevSpec(0, 0.6), 1.0, seed=s), times) for s in range(3)]
        r1 = trilinear_ratio(*us, eps=0.1)
        scaled = [Trajectory(grid2, times, 2.5 * u.coeffs) for u in us]
        r2 = trilinear_ratio(*scaled, eps=0.1)
        assert r2 == pytest.approx(r1, rel=1e-12)

    def test_odd_variant_runs(self, grid3):
        times = np.linspace(0, 1, 9)
        us = [
            free_trajectory(random_small_data(grid3, SobolevSpec(0, 1.1, "split"), 1.0, seed=s), times)
            for s in range(3)
        ]
        r = trilinear_ratio(*us, eps=0.1, variant="odd")
        assert np.isfinite(r) and r > 0

    def test_variant_constraints(self, grid2, grid3):
        times = np.linspace(0, 1, 5)
        t2 = free_trajectory(pure_mode(grid2, (1, 1), (1,)), times)
        t3 = free_trajectory(pure_mode(grid3, (1, 1, 1), (1,)), times)
        with pytest.raises(GridError):
            trilinear_ratio(t2, t2, t2, 0.1, variant="odd")
        with pytest.raises(GridError):
            trilinear_ratio(t3, t3, t3, 0.1, variant="even")

    def test_scan_runs(self, grid2):
        res = trilinear_scan(grid2, 0.1, samples=3, seed=0, final_time=1.0, n_times=9)
        assert all(np.isfinite(r) and r > 0 for r in res.ratios)
