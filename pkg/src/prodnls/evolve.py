"""Nonlinear evolution: split-step oracle, the integral-equation map, and the
fixed-point construction.

Sign conventions, fixed once and used everywhere: the equation is

    i d_t u + Lap_{x,y} u = kappa |u|^2 u,      kappa in {+1, -1, 0},

whose integral form is u(t) = exp(i t Lap) f - i kappa int_0^t
exp(i (t-s) Lap) |u(s)|^2 u(s) ds. The split-step integrator alternates the
exact linear flow with the exact pointwise phase rotation
u <- exp(-i kappa chi dt) u, chi = |u|^2. Both substeps are L^2 isometries, so
mass is conserved to roundoff. When dealiasing is on, the 2/3-rule filter is
applied to the intensity chi (not to the state): the rotation stays an exact
isometry and the integral-equation route uses the same filtered cubic
kappa * chi * u, keeping the two solvers consistent discretizations of one
system.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from ._parallel import parallel_map
from .grid import GridError, GridSpec, SpectralField, from_spectral
from .propagate import _duhamel_accumulate
from .sobolev import SobolevSpec, default_spec
from .spacetime import Trajectory, free_trajectory, solution_space_norm


class BlowupError(RuntimeError):
    """Evolution aborted: NaN or mass drift beyond tolerance."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


class PicardDivergenceError(RuntimeError):
    """Fixed-point iteration failed to contract within the iteration budget."""

    def __init__(self, trace: "PicardTrace"):
        last = trace.ratios[-1] if trace.ratios else float("nan")
        super().__init__(
            f"no convergence in {trace.iterates} iterations (last ratio {last:.3g}); "
            "data may be too large for the small-data regime"
        )
        self.trace = trace


@dataclass(frozen=True)
class EvolutionConfig:
    kappa: int
    final_time: float
    dt: float
    dealias: bool = True
    boundary_margin: float = 0.1
    stride: int = 1

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise ValueError(f"kappa must be -1, 0 or +1, got {self.kappa}")
        if not (self.final_time > 0 and self.dt > 0):
            raise ValueError("final_time and dt must be positive")
        steps = self.final_time / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"dt={self.dt} does not divide final_time={self.final_time}")
        if not 0 <= self.boundary_margin < 0.5:
            raise ValueError(f"boundary_margin must lie in [0, 1/2), got {self.boundary_margin}")
        if self.stride < 1 or round(steps) % self.stride:
            raise ValueError(f"stride={self.stride} must divide the {round(steps)} steps")

    @property
    def n_steps(self) -> int:
        return round(self.final_time / self.dt)

    def snapshot_times(self) -> np.ndarray:
        return self.dt * self.stride * np.arange(self.n_steps // self.stride + 1)


@dataclass
class PicardTrace:
    """Convergence record of the fixed-point iteration: distances between
    successive iterates in the solution-space norm, their ratios (recorded
    only while the distance is meaningfully above tolerance), and the largest
    iterate norm seen (the empirical invariant-ball radius)."""

    tol: float
    distances: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    ball_radius: float = 0.0
    converged: bool = False

    @property
    def iterates(self) -> int:
        return len(self.distances)


def _filtered_intensity(phys: np.ndarray, grid: GridSpec, dealias: bool) -> np.ndarray:
    chi = _kernels.abs2(phys)
    if dealias:
        chi = np.fft.ifftn(np.fft.fftn(chi) * grid.dealias_mask).real
    return chi


def nonlinearity(u: SpectralField, kappa: int, dealias: bool = False) -> SpectralField:
    """kappa |u|^2 u, evaluated pointwise in physical space (with the
    intensity optionally 2/3-filtered), returned in coefficients."""
    g = u.grid
    if kappa == 0:
        return SpectralField(g, np.zeros(g.shape, dtype=np.complex128))
    phys = from_spectral(u)
    chi = _filtered_intensity(phys, g, dealias)
    out = np.fft.fftn(kappa * chi * phys) * (g.norm_factor * g.center_signs)
    return SpectralField(g, out)


def split_step(u: SpectralField, dt: float, kappa: int, dealias: bool = False) -> SpectralField:
    """One Strang step: half linear flow, full nonlinear phase, half linear."""
    g = u.grid
    c = _kernels.apply_phase(u.coeffs, g.symbol, dt / 2)
    if kappa != 0:
        inv_w = g.center_signs / g.norm_factor
        phys = np.fft.ifftn(c * inv_w)
        chi = _filtered_intensity(phys, g, dealias)
        phys = _kernels.rotate_by_intensity_inplace(phys, chi, kappa * dt)
        c = np.fft.fftn(phys) * (g.norm_factor * g.center_signs)
    _kernels.apply_phase_inplace(c, g.symbol, dt / 2)
    return SpectralField(g, c)


def evolve(f: SpectralField, config: EvolutionConfig, on_snapshot=None) -> Trajectory:
    """March the split-step integrator from f, storing every `stride`-th step.

    Aborts with BlowupError on NaN or on relative mass drift above 1e-8
    (either signals the run has left the regime the discretization models).
    `on_snapshot(t, field)`, when given, is called as each stored snapshot is
    produced, so callers can flush partial output before a potential abort.
    """
    g = f.grid
    half_phase = np.exp(-1j * (config.dt / 2) * g.symbol)
    inv_w = g.center_signs / g.norm_factor
    fwd_w = g.norm_factor * g.center_signs
    kappa, dealias = config.kappa, config.dealias

    def emit(t, coeffs):
        if on_snapshot is not None:
            on_snapshot(t, SpectralField(g, coeffs.copy()))

    c = np.array(f.coeffs, copy=True)
    mass0 = float(np.sum(_kernels.abs2(c)))
    if not np.isfinite(mass0):
        raise BlowupError("NaN in the initial state", 0.0)
    snaps = [c.copy()]
    emit(0.0, c)
    for step in range(config.n_steps):
        c *= half_phase
        if kappa != 0:
            phys = np.fft.ifftn(c * inv_w)
            chi = _filtered_intensity(phys, g, dealias)
            phys = _kernels.rotate_by_intensity_inplace(phys, chi, kappa * config.dt)
            c = np.fft.fftn(phys) * fwd_w
        c *= half_phase
        t_now = (step + 1) * config.dt
        mass = float(np.sum(_kernels.abs2(c)))
        if not np.isfinite(mass):
            raise BlowupError("NaN encountered", t_now)
        if mass0 > 0 and abs(mass - mass0) > 1e-8 * mass0:
            raise BlowupError(f"mass drift {abs(mass - mass0) / mass0:.3e}", t_now)
        if (step + 1) % config.stride == 0:
            snaps.append(c.copy())
            emit(t_now, c)
    return Trajectory(g, config.snapshot_times(), np.stack(snaps))


def boundary_mass_fraction(u: SpectralField, margin: float) -> float:
    """Fraction of L^2 mass inside the wrap-monitor band of the box."""
    phys = _kernels.abs2(from_spectral(u))
    total = float(phys.sum())
    if total == 0:
        return 0.0
    return float(phys[u.grid.boundary_mask(margin)].sum()) / total


def trajectory_boundary_fractions(traj: Trajectory, margin: float) -> np.ndarray:
    return np.array(parallel_map(lambda f: boundary_mass_fraction(f, margin), traj.fields()))


def energy(u: SpectralField, kappa: int) -> float:
    """H(u) = int |grad u|^2 + (kappa/2) |u|^4, the conserved Hamiltonian."""
    g = u.grid
    kinetic = float(np.sum(g.symbol * _kernels.abs2(u.coeffs)))
    if kappa == 0:
        return kinetic
    phys = _kernels.abs2(from_spectral(u))
    quartic = float(np.sum(phys**2)) * g.x_cell_volume * g.y_cell_volume
    return kinetic + 0.5 * kappa * quartic


def duhamel_apply(f: SpectralField, traj_u: Trajectory, kappa: int, dealias: bool = False) -> Trajectory:
    """The integral-equation map: evaluate

        T_f(u)(t) = exp(i t Lap) f - i kappa int_0^t exp(i (t-s) Lap) |u|^2 u ds

    on every snapshot time of traj_u, by the trapezoid integrating-factor
    recursion (cost linear in the number of snapshots)."""
    g = traj_u.grid
    if f.grid != g:
        raise GridError("datum and trajectory grids differ")
    if abs(traj_u.times[0]) > 1e-12:
        raise GridError("integral-equation trajectories must start at t=0")
    free = free_trajectory(f, traj_u.times)
    if kappa == 0 or len(traj_u) == 1:
        return free
    cubic = np.stack([nonlinearity(traj_u.field(i), kappa, dealias).coeffs for i in range(len(traj_u))])
    integral = _duhamel_accumulate(cubic, g.symbol, traj_u.dt)
    return Trajectory(g, traj_u.times, free.coeffs - 1j * integral)


def picard_solve(
    f: SpectralField,
    config: EvolutionConfig,
    tol: float = 1e-10,
    max_iter: int = 25,
    spec: Optional[SobolevSpec] = None,
    eps: float = 0.1,
):
    """Successive substitution u_{j+1} = T_f(u_j) from the free solution.

    Distances between iterates are measured in the solution-space norm
    (max of sup-in-time Sobolev and the L^4-in-time part). Returns the fixed
    point and its trace; raises PicardDivergenceError after max_iter.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if config.stride != 1:
        raise ValueError("fixed-point iteration needs every step stored (stride=1)")
    g = f.grid
    if spec is None:
        spec = default_spec(g, eps)
    trace = PicardTrace(tol=tol)
    current = free_trajectory(f, config.snapshot_times())
    trace.ball_radius = solution_space_norm(current, spec, eps)
    for _ in range(max_iter):
        nxt = duhamel_apply(f, current, config.kappa, config.dealias)
        diff = Trajectory(g, current.times, nxt.coeffs - current.coeffs)
        d = solution_space_norm(diff, spec, eps)
        if trace.distances and trace.distances[-1] > tol * 10:
            trace.ratios.append(d / trace.distances[-1])
        trace.distances.append(d)
        trace.ball_radius = max(trace.ball_radius, solution_space_norm(nxt, spec, eps))
        current = nxt
        if d < tol:
            trace.converged = True
            return current, trace
    raise PicardDivergenceError(trace)


@dataclass(frozen=True)
class DifferenceBoundReport:
    """Pointwise check of the cubic difference identity plus the empirical
    two-point contraction quotient."""

    identity_residual: float
    ratio: Optional[float]
    v_norm: float
    w_norm: float
    difference_norm: float


def difference_bound_check(
    v: Trajectory,
    w: Trajectory,
    kappa: int,
    eps: float = 0.1,
    spec: Optional[SobolevSpec] = None,
) -> DifferenceBoundReport:
    """Verify v^2 conj(v) - w^2 conj(w) = (v-w)(v+w) conj(w) + v^2 conj(v-w)
    pointwise, and report || T(v)-T(w) ||_Y / (||v-w||_Y (||v||_Y+||w||_Y)^2).
    """
    g = v.grid
    if w.grid != g or len(v) != len(w):
        raise GridError("trajectories must share grid and time axis")
    if spec is None:
        spec = default_spec(g, eps)

    residual = 0.0
    for i in range(len(v)):
        pv = from_spectral(v.field(i))
        pw = from_spectral(w.field(i))
        lhs = pv**2 * np.conj(pv) - pw**2 * np.conj(pw)
        rhs = (pv - pw) * (pv + pw) * np.conj(pw) + pv**2 * np.conj(pv - pw)
        residual = max(residual, float(np.max(np.abs(lhs - rhs))))

    v_norm = solution_space_norm(v, spec, eps)
    w_norm = solution_space_norm(w, spec, eps)
    diff = Trajectory(g, v.times, v.coeffs - w.coeffs)
    diff_norm = solution_space_norm(diff, spec, eps)
    if diff_norm == 0:
        return DifferenceBoundReport(residual, None, v_norm, w_norm, 0.0)

    zero = SpectralField(g, np.zeros(g.shape, dtype=np.complex128))
    tv = duhamel_apply(zero, v, kappa)
    tw = duhamel_apply(zero, w, kappa)
    tdiff = Trajectory(g, v.times, tv.coeffs - tw.coeffs)
    num = solution_space_norm(tdiff, spec, eps)
    ratio = num / (diff_norm * (v_norm + w_norm) ** 2)
    return DifferenceBoundReport(residual, ratio, v_norm, w_norm, diff_norm)
