"""Wave-operator extraction and asymptotic-freedom diagnostics.

A solution scatters when its pullbacks g(t) = exp(-i t Lap) u(t) settle down
to a limit f0; since the free flow is an isometry of every norm used here, the
shadowing error || exp(i t Lap) f0 - u(t) || equals || f0 - g(t) ||, and the
Cauchy differences of the pullback ladder are the observable form of the
limit. The extraction probe itself has zero error by construction, so the
reported terminal error is taken at the probe before it.

Diagnostics run forward in time; the equation is time-reversible, so the
backward direction is the forward machinery applied to the conjugated datum.
"""

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .grid import GridError, SpectralField
from .propagate import free_propagate
from .sobolev import SobolevSpec, default_spec, hxy_norm
from .spacetime import Trajectory, instantaneous_qnorm


def pullback(traj: Trajectory, t: float) -> SpectralField:
    """exp(-i t Lap) u(t) for a snapshot time t (exact multiplier)."""
    i = traj.index_of(t)
    g = traj.grid
    return SpectralField(g, _kernels.apply_phase(traj.coeffs[i], g.symbol, -float(traj.times[i])))


@dataclass
class ScatteringReport:
    probe_times: List[float]
    cauchy_differences: List[float]  # ||g(T_{i+1}) - g(T_i)||, length M-1
    errors: List[float]  # ||exp(i T_i Lap) f0 - u(T_i)||, length M
    terminal_error: float  # error at the probe before the extraction probe
    state_norm: float  # ||f0|| in the same space
    theta: int
    rho: float
    variant: str
    decay_slope: Optional[float] = None
    decay_residual: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "probe_times": list(map(float, self.probe_times)),
            "cauchy_differences": list(map(float, self.cauchy_differences)),
            "errors": list(map(float, self.errors)),
            "terminal_error": float(self.terminal_error),
            "state_norm": float(self.state_norm),
            "space": {"theta": self.theta, "rho": self.rho, "variant": self.variant},
            "decay_slope": self.decay_slope,
            "decay_residual": self.decay_residual,
            **self.extras,
        }


def extract_scattering_state(
    traj: Trajectory,
    probe_times: Sequence[float],
    spec: Optional[SobolevSpec] = None,
    eps: float = 0.1,
) -> Tuple[SpectralField, ScatteringReport]:
    """Candidate scattering datum f0 = pullback at the last probe, plus the
    Cauchy/shadowing diagnostics along the probe ladder."""
    probe_times = sorted(float(t) for t in probe_times)
    if len(probe_times) < 3:
        raise GridError(f"need at least 3 probe times, got {len(probe_times)}")
    if spec is None:
        spec = default_spec(traj.grid, eps)

    pulled = [pullback(traj, t) for t in probe_times]
    cauchy = [hxy_norm(pulled[i + 1] - pulled[i], spec) for i in range(len(pulled) - 1)]
    f0 = pulled[-1]
    errors = []
    for t in probe_times:
        shadow = free_propagate(f0, t)
        errors.append(hxy_norm(shadow - traj.field(traj.index_of(t)), spec))
    report = ScatteringReport(
        probe_times=probe_times,
        cauchy_differences=cauchy,
        errors=errors,
        terminal_error=errors[-2],
        state_norm=hxy_norm(f0, spec),
        theta=spec.theta,
        rho=spec.rho,
        variant=spec.variant,
    )
    return f0, report


def dispersive_decay_fit(
    traj: Trajectory,
    q: float,
    window: Optional[Tuple[float, float]] = None,
) -> Tuple[float, float]:
    """Least-squares slope of log ||u(t)||_{L^q_x L^2_y} against log t.

    Linear theory predicts -n (1/2 - 1/q) for data that disperses freely
    inside the box. Returns (slope, rms residual of the fit).
    """
    if not q > 2:
        raise ValueError(f"decay fit needs q > 2, got {q}")
    times = traj.times
    keep = times > 0
    if window is not None:
        keep &= (times >= window[0]) & (times <= window[1])
    times = times[keep]
    if times.shape[0] < 3:
        raise GridError("decay window contains fewer than 3 positive snapshot times")
    if times[-1] / times[0] < 10.0:
        warnings.warn(
            f"decay window [{times[0]:.3g}, {times[-1]:.3g}] spans less than a decade; "
            "the fitted slope is indicative only",
            stacklevel=2,
        )
    values = np.array([instantaneous_qnorm(traj.field(i), q) for i in np.nonzero(keep)[0]])
    if np.any(values <= 0):
        return 0.0, 0.0
    logs = np.log(values)
    if np.ptp(logs) < 1e-14:  # time-constant trajectory
        return 0.0, 0.0
    design = np.stack([np.log(times), np.ones_like(times)], axis=1)
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - logs) ** 2)))
    return float(coef[0]), resid
