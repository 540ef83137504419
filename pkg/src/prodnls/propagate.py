"""Exact linear flows and the per-mode reductions they decompose into.

The full flow exp(i t Lap_{x,y}) multiplies the coefficient at (xi, m) by
exp(-i t (|xi|^2 + |m|^2)). Expanding in the transverse eigenbasis turns the
product-space problem into a stack of box problems with constant zeroth-order
shifts (the eigenvalues |m|^2); transforming additionally in the last x
coordinate does the same with shifts xi_n^2 + |m|^2. Those reductions are
exact identities on the lattice, and this module exposes both directions so
they can be checked against each other.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .grid import GridError, GridSpec, SpectralField


def free_propagate(f: SpectralField, t: float) -> SpectralField:
    """exp(i t Lap_{x,y}) f: unitary phase multiplier exp(-i t (|xi|^2+|m|^2))."""
    if not np.isfinite(t):
        raise ValueError(f"propagation time must be finite, got {t}")
    return f.with_coeffs(_kernels.apply_phase(f.coeffs, f.grid.symbol, float(t)))


def modulated_propagate_x(h: np.ndarray, grid: GridSpec, t: float, m_shift: float) -> np.ndarray:
    """exp(i t (Lap_x + m_shift)) on an x-only coefficient array.

    The shift contributes only the scalar phase exp(i t m_shift); computed in
    factored form so the modulated family is the unmodulated one times a
    unimodular constant, which is the whole point of the uniformity check.
    """
    h = np.asarray(h, dtype=np.complex128)
    phase = np.exp(1j * t * m_shift)
    return phase * _kernels.apply_phase(h, grid.xi_sq_x_only, float(t))


@dataclass(frozen=True)
class ModeStack:
    """A field split into transverse eigenmode slices.

    `slices[j]` is the x-frequency tensor multiplying the j-th torus mode
    (flattened y lattice, lattice order); `eigenvalues[j] = |m_j|^2`.
    """

    grid: GridSpec
    slices: np.ndarray  # shape (modes, N_x, ..., N_x)
    eigenvalues: np.ndarray  # shape (modes,)


def _mode_vectors(grid: GridSpec) -> np.ndarray:
    """Integer mode vectors in lattice order matching the flattened y axes."""
    grids = np.meshgrid(*([grid.m_axis] * grid.k), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def mode_decompose(f: SpectralField) -> ModeStack:
    g = f.grid
    n_modes = g.torus_modes**g.k
    # move y axes in front, flattened: (modes, x-lattice)
    c = np.moveaxis(f.coeffs, g.y_axes, tuple(range(g.k)))
    slices = c.reshape((n_modes,) + (g.points_per_axis,) * g.n).copy()
    eigenvalues = np.sum(_mode_vectors(g) ** 2, axis=-1)
    return ModeStack(g, slices, eigenvalues)


def mode_reconstruct(stack: ModeStack) -> SpectralField:
    g = stack.grid
    c = stack.slices.reshape((g.torus_modes,) * g.k + (g.points_per_axis,) * g.n)
    coeffs = np.moveaxis(c, tuple(range(g.k)), g.y_axes)
    return SpectralField(g, coeffs)


def reduced_evolve(
    slice_coeffs: np.ndarray,
    grid: GridSpec,
    lam: float,
    t: float,
    forcing: Optional[np.ndarray] = None,
    times: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Evolve one eigenmode slice: i d_t u + Lap_x u - lam u = F, i.e.

        u(t) = exp(i t (Lap_x - lam)) u(0)
               - i int_0^t exp(i (t-s) (Lap_x - lam)) F(s) ds.

    Homogeneous part is the modulated propagator with shift -lam. With
    `forcing` (values of F on the uniform grid `times`, stacked along axis 0,
    ending at time t) the source term is accumulated with the same
    integrating-factor trapezoid rule the full-space integral-equation solver
    uses, so per-mode and full-space answers agree to roundoff.
    """
    u = np.asarray(slice_coeffs, dtype=np.complex128)
    if forcing is None:
        return modulated_propagate_x(u, grid, t, -lam)
    times = np.asarray(times, dtype=float)
    if forcing.shape[0] != times.shape[0]:
        raise GridError("forcing snapshots do not match the time grid")
    if not np.isclose(times[-1], t):
        raise GridError(f"final forcing time {times[-1]} does not match t={t}")
    sym = grid.xi_sq_x_only + lam
    dt = times[1] - times[0]
    homog = _kernels.apply_phase(u, sym, t)
    integral = _duhamel_accumulate(np.asarray(forcing, dtype=np.complex128), sym, dt)
    return homog - 1j * integral[-1]


def _duhamel_accumulate(forcing: np.ndarray, symbol: np.ndarray, dt: float) -> np.ndarray:
    """Trapezoid integrating-factor recursion for int_0^t exp(i(t-s)Lap) F ds.

    With I_j the integral at t_j and G_j = F(t_j):

        I_{j+1} = exp(i dt Lap) (I_j + dt/2 G_j) + dt/2 G_{j+1},

    each step applying only the one-step phase (no large arguments). Returns
    the integral at every grid time, shape == forcing.shape.
    """
    out = np.empty_like(forcing, dtype=np.complex128)
    acc = np.zeros(forcing.shape[1:], dtype=np.complex128)
    out[0] = acc
    for j in range(forcing.shape[0] - 1):
        acc = acc + (dt / 2) * forcing[j]
        acc = _kernels.apply_phase_inplace(acc, symbol, dt)
        acc = acc + (dt / 2) * forcing[j + 1]
        out[j + 1] = acc
    return out


@dataclass(frozen=True)
class PartialFourierStack:
    """Joint (xi_n, m) slicing used for odd spatial dimension.

    `slices[i]` is an xbar-frequency tensor; `eigenvalues[i] = xi_n^2 + |m|^2`
    is the combined constant shift of the reduced problem on the first n-1
    coordinates.
    """

    grid: GridSpec
    slices: np.ndarray  # shape (N_x * modes, N_x, ..., N_x) over xbar
    eigenvalues: np.ndarray


def partial_fourier(f: SpectralField) -> PartialFourierStack:
    g = f.grid
    if g.split_index is None:
        raise GridError("partial Fourier split requires a grid with split_index")
    last = g.split_index
    # move (x_n, y...) axes in front and flatten them into the slice index
    lead = (last,) + g.y_axes
    c = np.moveaxis(f.coeffs, lead, tuple(range(1 + g.k)))
    n_slices = g.points_per_axis * g.torus_modes**g.k
    slices = c.reshape((n_slices,) + (g.points_per_axis,) * (g.n - 1)).copy()
    xi_n = np.repeat(g.xi_axis, g.torus_modes**g.k)
    lam_y = np.tile(np.sum(_mode_vectors(g) ** 2, axis=-1), g.points_per_axis)
    return PartialFourierStack(g, slices, xi_n**2 + lam_y)


def partial_fourier_inverse(stack: PartialFourierStack) -> SpectralField:
    g = stack.grid
    last = g.split_index
    c = stack.slices.reshape((g.points_per_axis,) + (g.torus_modes,) * g.k + (g.points_per_axis,) * (g.n - 1))
    coeffs = np.moveaxis(c, tuple(range(1 + g.k)), (last,) + g.y_axes)
    return SpectralField(g, coeffs)


def reduced_free_full(f: SpectralField, t: float, route: str = "modes") -> SpectralField:
    """Free evolution computed the long way around, via a per-slice reduction.

    route="modes" uses the transverse eigenmode stack; route="split" uses the
    joint (xi_n, m) stack (grid must carry split_index). Agreement with
    free_propagate is the executable content of the reduction identities.
    """
    if route == "modes":
        stack = mode_decompose(f)
        xbar_grid = f.grid
        evolved = np.stack(
            [
                modulated_propagate_x(stack.slices[j], xbar_grid, t, -float(stack.eigenvalues[j]))
                for j in range(stack.slices.shape[0])
            ]
        )
        return mode_reconstruct(ModeStack(stack.grid, evolved, stack.eigenvalues))
    if route == "split":
        stack = partial_fourier(f)
        evolved = np.empty_like(stack.slices)
        for j in range(stack.slices.shape[0]):
            shift = float(stack.eigenvalues[j])
            evolved[j] = np.exp(-1j * t * shift) * _kernels.apply_phase(
                stack.slices[j], _xbar_sq(f.grid), t
            )
        return partial_fourier_inverse(PartialFourierStack(stack.grid, evolved, stack.eigenvalues))
    raise ValueError(f"unknown route {route!r}")


def _xbar_sq(grid: GridSpec) -> np.ndarray:
    out = np.zeros((grid.points_per_axis,) * (grid.n - 1))
    for ax in range(grid.n - 1):
        shape = [1] * (grid.n - 1)
        shape[ax] = grid.points_per_axis
        out = out + (grid.xi_axis**2).reshape(shape)
    return out


# -- user-supplied eigen-tables for non-torus transverse factors ------------


@dataclass(frozen=True)
class EigenTable:
    """Explicit transverse spectral data: eigenvalues, quadrature weights on a
    sample grid, and eigenfunction samples (rows orthonormal under `weights`)."""

    eigenvalues: np.ndarray  # (J,), nonnegative, ascending not required
    weights: np.ndarray  # (Q,)
    functions: np.ndarray  # (J, Q) complex samples

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        phi = np.asarray(self.functions, dtype=np.complex128)
        if phi.shape != (lam.shape[0], w.shape[0]):
            raise ValueError(f"function matrix shape {phi.shape} does not match (J={lam.shape[0]}, Q={w.shape[0]})")
        if np.any(lam < -1e-12):
            raise ValueError("eigenvalues must be nonnegative")
        gram = (phi * w) @ phi.conj().T
        resid = np.max(np.abs(gram - np.eye(lam.shape[0])))
        if resid > 1e-10:
            raise ValueError(f"eigenfunction rows are not orthonormal (residual {resid:.3e})")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "functions", phi)

    def decompose(self, values: np.ndarray) -> np.ndarray:
        """Project samples over (..., Q) onto the basis: returns (..., J)."""
        return np.tensordot(np.asarray(values), (self.functions * self.weights).conj().T, axes=([-1], [0]))

    def reconstruct(self, modal: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(modal), self.functions, axes=([-1], [0]))

    def evolve_modal(self, modal: np.ndarray, t: float) -> np.ndarray:
        """Apply the transverse part of the free flow mode-by-mode."""
        return modal * np.exp(-1j * t * self.eigenvalues)


def torus_eigen_table(modes: int) -> EigenTable:
    """The built-in one-dimensional torus basis as an explicit table
    (exponentials on the 2 pi circle, uniform quadrature)."""
    q = 2 * np.pi / modes * np.arange(modes)
    m = np.fft.fftfreq(modes, d=1.0 / modes)
    phi = np.exp(1j * np.outer(m, q)) / np.sqrt(2 * np.pi)
    w = np.full(modes, 2 * np.pi / modes)
    return EigenTable(eigenvalues=m**2, weights=w, functions=phi)
