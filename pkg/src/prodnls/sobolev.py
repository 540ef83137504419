"""Anisotropic Sobolev norms, derivative/smoothing multipliers, random data.

The product-space norm is the displayed sum of L^2 norms

    ||f|| = sum_{|a| <= theta} || d_x^a (1 - Lap_y)^{rho/2} f ||_{L^2},

an l^1 aggregation over multi-indices (not the root-sum-square equivalent).
The split variant differentiates over the leading n-1 x-axes and smooths
jointly in (x_n, y).
"""

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .grid import GridError, GridSpec, SpectralField, from_spectral, to_spectral

MultiIndex = tuple  # nonnegative integer entries, one per differentiated axis


def multi_index_order(alpha: Sequence[int]) -> int:
    return int(sum(alpha))


def multi_indices(dim: int, order: int) -> Iterator[MultiIndex]:
    """All multi-indices of exact order `order` in `dim` variables."""
    if dim == 1:
        yield (order,)
        return
    for head in range(order + 1):
        for tail in multi_indices(dim - 1, order - head):
            yield (head,) + tail


def multi_indices_up_to(dim: int, order: int) -> Iterator[MultiIndex]:
    return itertools.chain.from_iterable(multi_indices(dim, s) for s in range(order + 1))


@dataclass(frozen=True)
class SobolevSpec:
    """Regularity bookkeeping: integer x-derivative count `theta`, fractional
    transverse smoothness `rho`, and which variant of the norm applies."""

    theta: int
    rho: float
    variant: str = "full"  # "full" | "split"

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError(f"theta must be nonnegative, got {self.theta}")
        if self.variant not in ("full", "split"):
            raise ValueError(f"unknown variant {self.variant!r}")


def default_spec(grid: GridSpec, eps: float = 0.1) -> SobolevSpec:
    """Data-space regularity for the given dimension parity: theta=(n-2)/2,
    rho=k/2+eps for even n; theta=(n-3)/2, rho=(k+1)/2+eps split for odd n>=3."""
    if grid.n % 2 == 0:
        return SobolevSpec(theta=(grid.n - 2) // 2, rho=grid.k / 2 + eps, variant="full")
    if grid.n == 1:
        return SobolevSpec(theta=0, rho=grid.k / 2 + eps, variant="full")
    return SobolevSpec(theta=(grid.n - 3) // 2, rho=(grid.k + 1) / 2 + eps, variant="split")


def _dx_weight(grid: GridSpec, alpha: Sequence[int]) -> np.ndarray:
    """The multiplier prod_j (i xi_j)^{alpha_j}, broadcast to full shape."""
    w = np.ones((1,) * (grid.n + grid.k), dtype=np.complex128)
    for ax, a in enumerate(alpha):
        if a:
            w = w * grid._axis_profile((1j * grid.xi_axis) ** a, ax)
    return w


def apply_dx(f: SpectralField, alpha: Sequence[int]) -> SpectralField:
    """Mixed partial derivative d_x^alpha. `alpha` has one entry per x-axis,
    or per x-bar axis (the first n-1) on a grid carrying a split index."""
    g = f.grid
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index entries must be nonnegative, got {alpha}")
    if len(alpha) == g.n:
        pass
    elif g.split_index is not None and len(alpha) == g.n - 1:
        alpha = alpha + (0,)
    else:
        raise GridError(f"multi-index length {len(alpha)} does not match the x-block of {g.n} axes")
    return f.with_coeffs(f.coeffs * _dx_weight(g, alpha))


def bessel_y_weight(grid: GridSpec, rho: float) -> np.ndarray:
    return (1.0 + grid.m_sq) ** (rho / 2.0)


def apply_bessel_y(f: SpectralField, rho: float) -> SpectralField:
    """(1 - Lap_y)^{rho/2}: multiply the mode-(m) coefficient by (1+|m|^2)^{rho/2}."""
    return f.with_coeffs(f.coeffs * bessel_y_weight(f.grid, rho))


def bessel_split_weight(grid: GridSpec, rho: float) -> np.ndarray:
    if grid.split_index is None:
        raise GridError("split smoothing requires a grid with split_index")
    xi_n_sq = grid._axis_profile(grid.xi_axis**2, grid.split_index)
    return (1.0 + xi_n_sq + grid.m_sq) ** (rho / 2.0)


def apply_bessel_split(f: SpectralField, rho: float) -> SpectralField:
    """(1 - d_{x_n}^2 - Lap_y)^{rho/2}, the joint smoothing in (x_n, y)."""
    return f.with_coeffs(f.coeffs * bessel_split_weight(f.grid, rho))


def hxy_norm(f: SpectralField, spec: SobolevSpec) -> float:
    """The anisotropic Sobolev norm of `spec` applied to `f` (Parseval form).

    full:  sum_{|a|<=theta, a over x}    || d^a (1-Lap_y)^{rho/2} f ||_2
    split: sum_{|a|<=theta, a over xbar} || d^a (1-d_{x_n}^2-Lap_y)^{rho/2} f ||_2
    """
    g = f.grid
    if spec.variant == "split":
        if g.split_index is None:
            raise GridError("split-variant norm requires a grid with split_index")
        dim = g.n - 1
        smooth_sq = bessel_split_weight(g, spec.rho) ** 2
    else:
        dim = g.n
        smooth_sq = bessel_y_weight(g, spec.rho) ** 2

    power = np.abs(f.coeffs) ** 2 * smooth_sq
    total = 0.0
    for alpha in multi_indices_up_to(dim, spec.theta):
        w = np.ones((1,) * (g.n + g.k))
        for ax, a in enumerate(alpha):
            if a:
                w = w * g._axis_profile(g.xi_axis ** (2 * a), ax)
        total += float(np.sqrt(np.sum(power * w)))
    return total


def random_small_data(
    grid: GridSpec,
    spec: SobolevSpec,
    delta: float,
    decay_rate: float = None,
    seed: int = 0,
    envelope_width: float = None,
    band_limit: float = None,
) -> SpectralField:
    """Seeded complex-Gaussian data with prescribed norm.

    Coefficient variance falls off like (1+|xi|^2+|m|^2)^{-decay_rate}
    (default rho + (n+k)/2 + 1, comfortably inside the data space); the draw
    is then rescaled so hxy_norm(f, spec) == delta exactly.

    Two optional localizers, both off by default, shape the sample for runs
    where the periodic box must mimic free space: `band_limit` applies a
    super-Gaussian cutoff exp(-(|xi|/limit)^8) so no energy travels faster
    than ~2*limit, and `envelope_width` multiplies by a centered Gaussian
    window exp(-|x|^2/(2 w^2)) in physical x-space so the data starts well
    clear of the wrap-monitor margin.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if decay_rate is None:
        decay_rate = spec.rho + (grid.n + grid.k) / 2 + 1
    if not decay_rate > 0:
        raise ValueError(f"decay_rate must be positive, got {decay_rate}")

    rng = np.random.default_rng(seed)
    for _ in range(2):
        raw = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        std = (1.0 + grid.xi_sq + grid.m_sq) ** (-decay_rate / 2.0)
        coeffs = raw * std
        if band_limit is not None:
            coeffs = coeffs * np.exp(-((np.sqrt(grid.xi_sq) / band_limit) ** 8))
        f = SpectralField(grid, coeffs)
        if envelope_width is not None:
            window = np.ones((1,) * (grid.n + grid.k))
            for ax in grid.x_axes:
                window = window * grid._axis_profile(
                    np.exp(-(grid.x_coords**2) / (2 * envelope_width**2)), ax
                )
            f = to_spectral(from_spectral(f) * window, grid)
        norm = hxy_norm(f, spec)
        if norm > 0:
            return f * (delta / norm)
    raise ValueError("random draw degenerated to the zero field twice")
