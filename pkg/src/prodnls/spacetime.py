"""Space-time mixed norms, admissibility arithmetic, and solution-space norms.

Norm conventions, fixed once: the inner L^2 over the transverse block is
computed by Parseval (exact on the lattice), the L^q over box coordinates is a
Riemann sum with cell volume (L/N_x)^dim, the L^p in time is a composite
trapezoid over the stored snapshots, and infinite exponents are grid maxima.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .grid import GridError, GridSpec, SpectralField
from .sobolev import (
    SobolevSpec,
    bessel_split_weight,
    bessel_y_weight,
    hxy_norm,
    multi_indices,
)

INF = math.inf


class AdmissibilityError(ValueError):
    """Exponents outside the allowed range for the requested relation."""


def admissible_q(n: int, p: float, kind: str = "strichartz", order: int = 0) -> float:
    """Solve the scaling relation for q given p.

    kind="strichartz":      2/p + n/q = n/2,   with p >= 2 (n > 2),
                            p > 2 (n = 2), p >= 4 (n = 1).
    kind="derivative":      2/p + n/q = 1 + order, with p > 2.
    """
    if p < 1:
        raise AdmissibilityError(f"p must be >= 1, got {p}")
    if kind == "strichartz":
        if n == 1 and p < 4:
            raise AdmissibilityError(f"2/p + n/q = n/2 with n=1 requires p >= 4, got p={p}")
        if n == 2 and p <= 2:
            raise AdmissibilityError(f"2/p + n/q = n/2 with n=2 requires p > 2, got p={p}")
        if n > 2 and p < 2:
            raise AdmissibilityError(f"2/p + n/q = n/2 with n={n} requires p >= 2, got p={p}")
        inv_q = (n / 2 - (0.0 if p == INF else 2 / p)) / n
    elif kind == "derivative":
        if p <= 2:
            raise AdmissibilityError(f"2/p + n/q = 1 + {order} requires p > 2, got p={p}")
        inv_q = (1 + order - (0.0 if p == INF else 2 / p)) / n
    else:
        raise AdmissibilityError(f"unknown kind {kind!r}")
    if inv_q < 0 or inv_q > 1:
        raise AdmissibilityError(
            f"no exponent q in [1, inf] solves 2/p + n/q = {'n/2' if kind == 'strichartz' else f'1 + {order}'} "
            f"for n={n}, p={p}"
        )
    return INF if inv_q == 0 else 1 / inv_q


@dataclass(frozen=True)
class AdmissiblePair:
    n: int
    p: float
    q: float
    kind: str = "strichartz"
    order: int = 0

    def __post_init__(self):
        expected = admissible_q(self.n, self.p, self.kind, self.order)
        if expected == INF or self.q == INF:
            ok = expected == self.q
        else:
            ok = abs(expected - self.q) <= 1e-12 * max(1.0, expected)
        if not ok:
            relation = "2/p + n/q = n/2" if self.kind == "strichartz" else f"2/p + n/q = 1 + {self.order}"
            raise AdmissibilityError(
                f"(p={self.p}, q={self.q}) violates {relation} at n={self.n} (expected q={expected})"
            )

    @property
    def dual_p(self) -> float:
        return holder_conjugate(self.p)

    @property
    def dual_q(self) -> float:
        return holder_conjugate(self.q)


def holder_conjugate(p: float) -> float:
    if p == INF:
        return 1.0
    if p == 1:
        return INF
    return p / (p - 1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-indexed stack of spectral snapshots on a uniform time grid.

    Takes ownership of `coeffs` (the stack is frozen read-only in place;
    construct with a fresh array)."""

    grid: GridSpec
    times: np.ndarray
    coeffs: np.ndarray  # shape (len(times),) + grid.shape

    def __post_init__(self):
        times = np.array(self.times, dtype=float, copy=True)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if times.ndim != 1 or times.shape[0] == 0:
            raise GridError("trajectory needs at least one snapshot time")
        if coeffs.shape != (times.shape[0],) + self.grid.shape:
            raise GridError(f"snapshot stack shape {coeffs.shape} does not match grid/time axes")
        if times.shape[0] > 1:
            steps = np.diff(times)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
                raise GridError("snapshot times must be uniformly spaced")
        times.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "coeffs", coeffs)

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def field(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[i])

    def fields(self) -> Iterable[SpectralField]:
        return (self.field(i) for i in range(len(self)))

    @classmethod
    def from_fields(cls, fields: Sequence[SpectralField], times: Sequence[float]) -> "Trajectory":
        fields = list(fields)
        return cls(fields[0].grid, np.asarray(times, float), np.stack([f.coeffs for f in fields]))

    def index_of(self, t: float) -> int:
        hits = np.nonzero(np.isclose(self.times, t, rtol=1e-9, atol=1e-12))[0]
        if hits.size == 0:
            raise GridError(f"time {t} is not a snapshot time")
        return int(hits[0])

    def weighted(self, weight: np.ndarray) -> "Trajectory":
        """Apply one coefficient multiplier to every snapshot."""
        return Trajectory(self.grid, self.times, self.coeffs * weight)


def free_trajectory(f: SpectralField, times: Sequence[float]) -> Trajectory:
    times = np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(times, f.grid.symbol))
    return Trajectory(f.grid, times, phases * f.coeffs)


# -- norm machinery ----------------------------------------------------------


def _semispectral_stack(traj_coeffs: np.ndarray, grid: GridSpec, axes: Sequence[int]) -> np.ndarray:
    """Invert the transform on the listed x-axes of a snapshot stack.

    Output is scaled so that for each snapshot and each point of the inverted
    axes, the plain sum of |.|^2 over the remaining axes is the squared L^2
    norm (with its measure) of the field restricted to that point.
    """
    shifted_axes = tuple(a + 1 for a in axes)
    semi = np.fft.ifftn(traj_coeffs * grid.center_signs, axes=shifted_axes)
    scale = (grid.points_per_axis**2 / grid.box_length) ** (len(axes) / 2)
    return semi * scale


def lq_riemann(values: np.ndarray, cell: float, q: float) -> np.ndarray:
    """L^q norm over all axes past the first, Riemann sum with the given cell
    volume; the leading axis (time) is preserved."""
    flat = values.reshape(values.shape[0], -1)
    if q == INF:
        return flat.max(axis=1)
    return (np.sum(flat**q, axis=1) * cell) ** (1 / q)


def lp_time(values: np.ndarray, times: np.ndarray, p: float) -> float:
    """Composite-trapezoid L^p norm in time of per-snapshot values."""
    if p == INF:
        return float(values.max())
    if times.shape[0] == 1:
        return 0.0
    return float(np.trapezoid(values**p, times) ** (1 / p))


def profile_mixed_norm(profiles: np.ndarray, times: np.ndarray, grid: GridSpec, p: float, q: float, x_dim: int = None) -> float:
    """L^p_t L^q_x of nonnegative profiles with shape (N_t, x-lattice...)."""
    if x_dim is None:
        x_dim = grid.n
    cell = (grid.box_length / grid.points_per_axis) ** x_dim
    return lp_time(lq_riemann(profiles, cell, q), times, p)


def mixed_norm(traj: Trajectory, p: float, q: float) -> float:
    """|| u ||_{L^p_t L^q_x L^2_y} of a trajectory."""
    if len(traj) == 0:
        raise GridError("empty trajectory")
    g = traj.grid
    semi = _semispectral_stack(traj.coeffs, g, g.x_axes)
    y_flat = semi.reshape(semi.shape[: 1 + g.n] + (-1,))
    profiles = np.sqrt(np.sum(np.abs(y_flat) ** 2, axis=-1))
    return profile_mixed_norm(profiles, traj.times, g, p, q)


def instantaneous_qnorm(f: SpectralField, q: float) -> float:
    """|| u ||_{L^q_x L^2_y} of a single snapshot."""
    g = f.grid
    semi = _semispectral_stack(f.coeffs[np.newaxis], g, g.x_axes)
    profiles = np.sqrt(np.sum(np.abs(semi.reshape(semi.shape[: 1 + g.n] + (-1,))) ** 2, axis=-1))
    return float(lq_riemann(profiles, g.x_cell_volume, q)[0])


def mixed_norm_split(traj: Trajectory, p: float, q: float) -> float:
    """|| u ||_{L^p_t L^q_xbar L^2_{(x_n, y)}} for grids carrying the split."""
    g = traj.grid
    if g.split_index is None:
        raise GridError("split mixed norm requires a grid with split_index")
    semi = _semispectral_stack(traj.coeffs, g, tuple(range(g.n - 1)))
    flat = semi.reshape(semi.shape[: 1 + g.n - 1] + (-1,))
    profiles = np.sqrt(np.sum(np.abs(flat) ** 2, axis=-1))
    return profile_mixed_norm(profiles, traj.times, g, p, q, x_dim=g.n - 1)


def x_eps_norm(traj: Trajectory, eps: float) -> float:
    """Even-dimension solution-space norm:

        sum_{s=0}^{(n-2)/2} sum_{|a|=s}
            || d_x^a (1-Lap_y)^{(k/2+eps)/2} u ||_{L^4_t L^{2n/(1+2s)}_x L^2_y}.
    """
    g = traj.grid
    if g.n % 2 != 0:
        raise GridError(f"even-dimension norm needs even n, got n={g.n}")
    smooth = traj.weighted(bessel_y_weight(g, g.k / 2 + eps))
    total = 0.0
    for s in range((g.n - 2) // 2 + 1):
        q = 2 * g.n / (1 + 2 * s)
        for alpha in multi_indices(g.n, s):
            w = np.ones((1,) * (g.n + g.k), dtype=np.complex128)
            for ax, a in enumerate(alpha):
                if a:
                    w = w * g._axis_profile((1j * g.xi_axis) ** a, ax)
            total += mixed_norm(smooth.weighted(w), 4.0, q)
    return total


def x_norm_odd(traj: Trajectory, eps: float) -> float:
    """Odd-dimension solution-space norm:

        sum_{s=0}^{(n-3)/2} sum_{|a|=s over xbar}
            || d_xbar^a (1-d_{x_n}^2-Lap_y)^{(k+1)/4+eps} u
            ||_{L^4_t L^{2(n-1)/(1+2s)}_xbar L^2_{(x_n,y)}}.

    The smoothing exponent (k+1)/4+eps is the displayed one; it exceeds the
    data-space exponent rho/2 = (k+1)/4 + eps/2 by eps/2.
    """
    g = traj.grid
    if g.n % 2 == 0 or g.n < 3:
        raise GridError(f"odd-dimension norm needs odd n >= 3, got n={g.n}")
    if g.split_index is None:
        raise GridError("odd-dimension norm requires a grid with split_index")
    smooth = traj.weighted(bessel_split_weight(g, (g.k + 1) / 2 + 2 * eps))
    total = 0.0
    for s in range((g.n - 3) // 2 + 1):
        q = 2 * (g.n - 1) / (1 + 2 * s)
        for alpha in multi_indices(g.n - 1, s):
            w = np.ones((1,) * (g.n + g.k), dtype=np.complex128)
            for ax, a in enumerate(alpha):
                if a:
                    w = w * g._axis_profile((1j * g.xi_axis) ** a, ax)
            total += mixed_norm_split(smooth.weighted(w), 4.0, q)
    return total


def solution_space_norm(traj: Trajectory, spec: SobolevSpec, eps: float) -> float:
    """The complete-space norm max(sup_t H-norm, X-norm); the max realizes the
    intersection of the two memberships as a single number."""
    sup_h = max(hxy_norm(f, spec) for f in traj.fields())
    g = traj.grid
    if g.n % 2 == 0:
        x_part = x_eps_norm(traj, eps)
    elif g.n >= 3:
        x_part = x_norm_odd(traj, eps)
    else:
        # n=1 endpoint analogue: single admissible pair (4, inf)
        x_part = mixed_norm(traj.weighted(bessel_y_weight(g, g.k / 2 + eps)), 4.0, INF)
    return max(sup_h, x_part)


def minkowski_gap(stack: np.ndarray, times: np.ndarray, grid: GridSpec, p: float, q: float) -> float:
    """Difference ||h||_{L^p L^q l^2_j} - ||h||_{l^2_j L^p L^q} for a stack of
    scalar space-time slices, shape (J, N_t, x-lattice...). Nonpositive (up to
    roundoff) whenever p, q >= 2."""
    if p < 2 or q < 2:
        raise AdmissibilityError(f"gap direction guaranteed only for p, q >= 2, got ({p}, {q})")
    inside = np.sqrt(np.sum(np.abs(stack) ** 2, axis=0))
    lhs = profile_mixed_norm(inside, times, grid, p, q, x_dim=stack.ndim - 2)
    per_slice = np.array(
        [profile_mixed_norm(np.abs(stack[j]), times, grid, p, q, x_dim=stack.ndim - 2) for j in range(stack.shape[0])]
    )
    rhs = float(np.sqrt(np.sum(per_slice**2)))
    return lhs - rhs
