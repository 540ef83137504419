"""Lattice geometry and transform contracts."""

import numpy as np
import pytest

from prodnls.grid import (
    GridError,
    SpectralField,
    from_spectral,
    make_grid,
    to_spectral,
    x_semispectral,
)

from conftest import physical_l2, pure_mode, random_samples


class TestMakeGrid:
    def test_frequency_spacing(self):
        grid = make_grid(2, 1, 32 * np.pi, 64, 8)
        assert grid.xi_axis[1] == pytest.approx(1 / 16, abs=1e-15)

    def test_integer_frequencies_on_2pi_box(self):
        grid = make_grid(1, 1, 2 * np.pi, 4, 4)
        assert sorted(grid.xi_axis) == pytest.approx([-2, -1, 0, 1])

    def test_split_marks_last_axis(self):
        grid = make_grid(3, 1, 32 * np.pi, 64, 8, split_index=2)
        assert grid.split_index == 2
        assert grid.x_axes == (0, 1, 2)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=2, k=1, box_length=1.0, points_per_axis=12, torus_modes=8),
            dict(n=2, k=1, box_length=1.0, points_per_axis=16, torus_modes=7),
            dict(n=2, k=1, box_length=-3.0, points_per_axis=16, torus_modes=8),
            dict(n=2, k=1, box_length=1.0, points_per_axis=16, torus_modes=8, split_index=0),
            dict(n=0, k=1, box_length=1.0, points_per_axis=16, torus_modes=8),
        ],
    )
    def test_invalid_grids_rejected(self, kwargs):
        with pytest.raises(GridError):
            make_grid(**kwargs)


class TestTransforms:
    def test_constant_sample_is_dc_mode(self):
        grid = make_grid(1, 1, 2 * np.pi, 4, 4)
        f = to_spectral(np.ones(grid.shape), grid)
        nonzero = np.abs(f.coeffs) > 1e-12
        assert nonzero.sum() == 1
        assert nonzero[0, 0]

    def test_pure_exponential_is_single_mode(self):
        grid = make_grid(1, 1, 2 * np.pi, 8, 4)
        x = grid.x_coords[:, None] + 0 * grid.y_coords[None, :]
        f = to_spectral(np.exp(1j * x), grid)
        nonzero = np.abs(f.coeffs) > 1e-12
        assert nonzero.sum() == 1
        assert nonzero[1, 0]  # frequency index for xi = +1

    def test_round_trip(self, grid2):
        samples = random_samples(grid2, 0)
        back = from_spectral(to_spectral(samples, grid2))
        assert np.max(np.abs(back - samples)) <= 1e-12 * np.max(np.abs(samples))

    def test_zero_field_zero_samples(self, grid2):
        zero = SpectralField(grid2, np.zeros(grid2.shape, complex))
        assert np.all(from_spectral(zero) == 0)

    def test_delta_coefficient_is_plane_wave(self):
        grid = make_grid(2, 1, 8 * np.pi, 8, 4)
        xi = grid.xi_axis[3]
        m = grid.m_axis[1]
        f = pure_mode(grid, (3, 0), (1,))
        phys = from_spectral(f)
        x0, x1, y = np.meshgrid(grid.x_coords, grid.x_coords, grid.y_coords, indexing="ij")
        wave = np.exp(1j * (xi * x0 + m * y))
        # normalization: unit-L^2 mode, so |values| = 1/sqrt(volume)
        scale = 1 / np.sqrt(grid.box_length**2 * 2 * np.pi)
        assert np.max(np.abs(phys - scale * wave)) <= 1e-12

    def test_parseval(self, grid2):
        samples = random_samples(grid2, 1)
        f = to_spectral(samples, grid2)
        assert f.l2_norm() == pytest.approx(physical_l2(samples, grid2), rel=1e-12)

    def test_axis_order_independence(self, grid2):
        samples = random_samples(grid2, 2)
        xy = np.fft.fftn(np.fft.fftn(samples, axes=grid2.x_axes), axes=grid2.y_axes)
        yx = np.fft.fftn(np.fft.fftn(samples, axes=grid2.y_axes), axes=grid2.x_axes)
        assert np.max(np.abs(xy - yx)) <= 1e-12 * np.max(np.abs(xy))

    def test_shape_mismatch_rejected(self, grid2):
        with pytest.raises(GridError):
            to_spectral(np.zeros((3, 3)), grid2)
        with pytest.raises(GridError):
            SpectralField(grid2, np.zeros((4, 4), complex))


class TestFieldSemantics:
    def test_coeffs_read_only(self, rand_field):
        with pytest.raises(ValueError):
            rand_field.coeffs[0, 0, 0] = 1.0

    def test_semispectral_profile_matches_dense_quadrature(self, grid2):
        samples = random_samples(grid2, 3)
        f = to_spectral(samples, grid2)
        semi = x_semispectral(f)
        prof = np.sqrt(np.sum(np.abs(semi) ** 2, axis=-1))
        oracle = np.sqrt(np.sum(np.abs(samples) ** 2, axis=-1) * grid2.y_cell_volume)
        assert np.max(np.abs(prof - oracle)) <= 1e-12 * np.max(oracle)

    def test_boundary_mask_margin(self):
        grid = make_grid(1, 1, 8.0, 16, 4)
        mask = grid.boundary_mask(0.25)
        # outer quarter on each side: |x| >= 2
        expected = np.abs(grid.x_coords) >= 2.0
        assert np.array_equal(mask[:, 0], expected)
        with pytest.raises(GridError):
            grid.boundary_mask(0.6)
