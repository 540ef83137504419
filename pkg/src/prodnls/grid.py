"""Discrete geometry of the box-times-torus domain and its spectral transforms.

The domain is a periodic box [-L/2, L/2)^n standing in for R^n, crossed with a
flat torus T^k of side 2*pi. Fourier convention (fixed project-wide):

    fhat(xi) = integral f(x) exp(-i xi.x) dx,

so the free flow exp(i t Lap) acts on coefficients as exp(-i t (|xi|^2+|m|^2)).
Coefficients are normalized so that sum |coeffs|^2 equals the Riemann-sum
L^2 norm squared of the physical samples (cell volume (L/N_x)^n (2pi/N_y)^k),
which makes Parseval exact and single unit-modulus coefficients unit-L^2 modes.

Because the box is centered, pure frequency xi_q = 2 pi q / L picks up a phase
exp(-i pi q) = (-1)^q relative to the 0-based DFT; this alternating sign is
folded into the transforms so a delta coefficient maps to the plane wave over
the true coordinates.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np


class GridError(ValueError):
    """Invalid grid construction or a field/grid mismatch."""


def _is_power_of_two(v: int) -> bool:
    return v >= 1 and (v & (v - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Discretization of R^n_x x T^k_y.

    Attributes:
        n: spatial dimension of the box factor (>= 1)
        k: torus dimension (>= 1)
        box_length: side L of the periodic box [-L/2, L/2)^n
        points_per_axis: samples N_x per x-axis (power of two)
        torus_modes: modes N_y per y-axis (power of two); torus side is 2*pi
        split_index: optional axis index separating the last x coordinate,
            must equal n-1 when present
    """

    n: int
    k: int
    box_length: float
    points_per_axis: int
    torus_modes: int
    split_index: Optional[int] = None

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise GridError(f"need n >= 1 and k >= 1, got n={self.n}, k={self.k}")
        if not self.box_length > 0:
            raise GridError(f"box_length must be positive, got {self.box_length}")
        if not _is_power_of_two(self.points_per_axis):
            raise GridError(f"points_per_axis must be a power of two, got {self.points_per_axis}")
        if not _is_power_of_two(self.torus_modes):
            raise GridError(f"torus_modes must be a power of two, got {self.torus_modes}")
        if self.split_index is not None and self.split_index != self.n - 1:
            raise GridError(
                f"split_index must be n-1={self.n - 1} (last x coordinate), got {self.split_index}"
            )

    # -- lattice geometry -------------------------------------------------

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.n + (self.torus_modes,) * self.k

    @property
    def x_axes(self) -> tuple:
        return tuple(range(self.n))

    @property
    def y_axes(self) -> tuple:
        return tuple(range(self.n, self.n + self.k))

    @cached_property
    def x_coords(self) -> np.ndarray:
        """Sample coordinates on one x-axis, centered box."""
        dx = self.box_length / self.points_per_axis
        return -self.box_length / 2 + dx * np.arange(self.points_per_axis)

    @cached_property
    def y_coords(self) -> np.ndarray:
        return 2 * np.pi / self.torus_modes * np.arange(self.torus_modes)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        """Frequencies (2 pi / L) * {0,...,N/2-1,-N/2,...,-1} on one x-axis."""
        return 2 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.box_length / self.points_per_axis)

    @cached_property
    def m_axis(self) -> np.ndarray:
        """Integer torus modes {0,...,N/2-1,-N/2,...,-1} on one y-axis."""
        return np.fft.fftfreq(self.torus_modes, d=1.0 / self.torus_modes)

    @property
    def x_cell_volume(self) -> float:
        return (self.box_length / self.points_per_axis) ** self.n

    @property
    def y_cell_volume(self) -> float:
        return (2 * np.pi / self.torus_modes) ** self.k

    @property
    def total_points(self) -> int:
        return self.points_per_axis**self.n * self.torus_modes**self.k

    @property
    def norm_factor(self) -> float:
        """Scale making sum |coeffs|^2 equal the physical L^2 norm squared."""
        return np.sqrt(self.x_cell_volume * self.y_cell_volume / self.total_points)

    # -- multiplier tensors ------------------------------------------------

    def _axis_profile(self, values: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * (self.n + self.k)
        shape[axis] = len(values)
        return values.reshape(shape)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        """|xi|^2 over the full lattice (broadcast to full shape)."""
        out = np.zeros(self.shape)
        for ax in self.x_axes:
            out = out + self._axis_profile(self.xi_axis**2, ax)
        return out

    @cached_property
    def m_sq(self) -> np.ndarray:
        """|m|^2 over the full lattice."""
        out = np.zeros(self.shape)
        for ax in self.y_axes:
            out = out + self._axis_profile(self.m_axis**2, ax)
        return out

    @cached_property
    def symbol(self) -> np.ndarray:
        """|xi|^2 + |m|^2, the (negated) Laplace symbol driving the free flow."""
        return self.xi_sq + self.m_sq

    @cached_property
    def xi_sq_x_only(self) -> np.ndarray:
        """|xi|^2 over the x-lattice alone, shape (N_x,)*n."""
        out = np.zeros((self.points_per_axis,) * self.n)
        for ax in range(self.n):
            shape = [1] * self.n
            shape[ax] = self.points_per_axis
            out = out + (self.xi_axis**2).reshape(shape)
        return out

    @cached_property
    def center_signs(self) -> np.ndarray:
        """(-1)^q fold per x-axis compensating the centered box origin."""
        sign_1d = 1.0 - 2.0 * (np.abs(np.fft.fftfreq(self.points_per_axis, d=1.0 / self.points_per_axis)).astype(np.int64) % 2)
        out = np.ones(self.shape)
        for ax in self.x_axes:
            out = out * self._axis_profile(sign_1d, ax)
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask over all axes (True = keep)."""
        keep = np.ones(self.shape, dtype=bool)
        for ax, n_pts, freqs in [(a, self.points_per_axis, self.xi_axis) for a in self.x_axes] + [
            (a, self.torus_modes, self.m_axis) for a in self.y_axes
        ]:
            cutoff = (2.0 / 3.0) * np.abs(freqs).max()
            keep &= self._axis_profile(np.abs(freqs) <= cutoff, ax).astype(bool)
        return keep

    @cached_property
    def boundary_zone(self) -> dict:
        """Cache of margin -> boolean mask over physical x-points (any axis in
        the outer `margin * L` band). Populated lazily by boundary_mask()."""
        return {}

    def boundary_mask(self, margin: float) -> np.ndarray:
        if not 0 <= margin < 0.5:
            raise GridError(f"boundary margin must lie in [0, 1/2), got {margin}")
        if margin not in self.boundary_zone:
            edge = (0.5 - margin) * self.box_length
            mask = np.zeros(self.shape, dtype=bool)
            for ax in self.x_axes:
                mask |= self._axis_profile(np.abs(self.x_coords) >= edge, ax).astype(bool)
            self.boundary_zone[margin] = mask
        return self.boundary_zone[margin]


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A function on the product domain, stored as Fourier coefficients.

    Immutable: `coeffs` is made read-only at construction. All operations on
    fields return new instances.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise GridError(f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}")
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, coeffs)

    def l2_norm(self) -> float:
        """L^2 norm over the whole domain, by Parseval."""
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if other.grid is not self.grid and other.grid != self.grid:
            raise GridError("fields live on different grids")
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if other.grid is not self.grid and other.grid != self.grid:
            raise GridError("fields live on different grids")
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def make_grid(n, k, box_length, points_per_axis, torus_modes, split_index=None) -> GridSpec:
    """Validated grid constructor; see GridSpec for the field meanings."""
    return GridSpec(
        n=int(n),
        k=int(k),
        box_length=float(box_length),
        points_per_axis=int(points_per_axis),
        torus_modes=int(torus_modes),
        split_index=split_index,
    )


def to_spectral(samples: np.ndarray, grid: GridSpec) -> SpectralField:
    """Forward transform of physical samples (x axes first, then y axes)."""
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise GridError(f"sample shape {samples.shape} does not match grid {grid.shape}")
    coeffs = np.fft.fftn(samples) * (grid.norm_factor * grid.center_signs)
    return SpectralField(grid, coeffs)


def from_spectral(field: SpectralField) -> np.ndarray:
    """Physical samples over the true (centered-box, torus) coordinates."""
    g = field.grid
    return np.fft.ifftn(field.coeffs * g.center_signs / g.norm_factor)


def x_semispectral(field: SpectralField) -> np.ndarray:
    """Physical in x, modal in y, scaled so that per x-point

        sum_m |out[x, m]|^2  ==  ||u(x, .)||_{L^2_y}^2.

    This is the Parseval route to the inner L^2_y of every mixed norm.
    """
    g = field.grid
    semi = np.fft.ifftn(field.coeffs * g.center_signs, axes=g.x_axes)
    return semi * np.sqrt(g.points_per_axis**g.n / g.x_cell_volume)
