"""Fast invariant suite over tiny grids, with a mutation negative control.

Every check returns the observed slack against its tolerance; the harness is
deterministic (fixed seeds, fixed sizes <= 32 points per axis) so repeated
runs give identical verdicts. One check is a negative control: it reruns the
propagator-symbol invariant against a deliberately sign-flipped propagator
and passes only if that invariant FAILS, guarding the suite itself against
vacuous checks. (A bare group-composition test would not catch the flip --
the reversed symbol still composes additively -- so the invariant pins a
quarter-period pure-mode phase, where the sign of the symbol is visible.)
"""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import _kernels, scans
from .evolve import EvolutionConfig, duhamel_apply, evolve, nonlinearity
from .grid import SpectralField, from_spectral, make_grid, to_spectral
from .propagate import (
    free_propagate,
    mode_decompose,
    mode_reconstruct,
    reduced_free_full,
)
from .sobolev import SobolevSpec, apply_bessel_y, hxy_norm, random_small_data
from .spacetime import INF, free_trajectory, minkowski_gap, mixed_norm, profile_mixed_norm
from .scatter import pullback


@dataclass
class CheckResult:
    module: str
    invariant: str
    passed: bool
    slack: float
    tolerance: float

    def as_dict(self) -> dict:
        return {
            "module": self.module,
            "invariant": self.invariant,
            "passed": self.passed,
            "slack": self.slack,
            "tolerance": self.tolerance,
        }


def _grid2():
    return make_grid(2, 1, 8 * np.pi, 16, 8)


def _grid3():
    return make_grid(3, 1, 4 * np.pi, 8, 4, split_index=2)


def _rand_field(grid, seed, delta=1.0):
    return random_small_data(grid, SobolevSpec(0, grid.k / 2 + 0.1), delta, seed=seed)


def _propagator_symbol_slack(propagator: Callable) -> float:
    """Group composition plus a pinned quarter-period phase on a pure mode.

    The pinned value exp(-i pi/2) = -i on the (xi=1, m=1) mode at t = pi/4
    distinguishes the correct symbol from its sign flip; composition alone
    would not."""
    g = make_grid(1, 1, 2 * np.pi, 8, 8)
    f = _rand_field(g, 11)
    a = propagator(propagator(f, 0.3), 0.45)
    b = propagator(f, 0.75)
    slack = np.max(np.abs(a.coeffs - b.coeffs)) / max(np.max(np.abs(f.coeffs)), 1e-300)

    c = np.zeros(g.shape, dtype=np.complex128)
    c[1, 1] = 1.0  # xi = 1, m = 1, so the symbol value is 2
    mode = SpectralField(g, c)
    out = propagator(mode, np.pi / 4)
    slack = max(slack, float(abs(out.coeffs[1, 1] - (-1j))))
    return slack


def _mutated_free_propagate(f: SpectralField, t: float) -> SpectralField:
    # documented negative control: the symbol sign is flipped
    return f.with_coeffs(_kernels.apply_phase(f.coeffs, f.grid.symbol, -float(t)))


def run_checks() -> List[CheckResult]:
    checks: List[CheckResult] = []

    def add(module, invariant, slack, tol, passed=None):
        slack = float(slack)
        checks.append(CheckResult(module, invariant, bool(slack <= tol) if passed is None else passed, slack, tol))

    g2 = _grid2()
    rng = np.random.default_rng(0)
    samples = rng.standard_normal(g2.shape) + 1j * rng.standard_normal(g2.shape)

    f = to_spectral(samples, g2)
    add("lattice", "transform-round-trip", np.max(np.abs(from_spectral(f) - samples)) / np.max(np.abs(samples)), 1e-12)
    phys_l2 = np.sqrt(np.sum(np.abs(samples) ** 2) * g2.x_cell_volume * g2.y_cell_volume)
    add("lattice", "parseval", abs(f.l2_norm() - phys_l2) / phys_l2, 1e-12)
    by_x_then_y = np.fft.fftn(np.fft.fftn(samples, axes=g2.x_axes), axes=g2.y_axes)
    by_y_then_x = np.fft.fftn(np.fft.fftn(samples, axes=g2.y_axes), axes=g2.x_axes)
    add("lattice", "axis-order-independence", np.max(np.abs(by_x_then_y - by_y_then_x)) / np.max(np.abs(by_x_then_y)), 1e-12)

    spec = SobolevSpec(0, 1.1)
    u = _rand_field(g2, 1)
    v = _rand_field(g2, 2)
    add("fields", "norm-homogeneity", abs(hxy_norm(u * 3.5, spec) - 3.5 * hxy_norm(u, spec)) / hxy_norm(u, spec), 1e-10)
    tri = hxy_norm(u + v, spec) - hxy_norm(u, spec) - hxy_norm(v, spec)
    add("fields", "triangle-inequality", max(tri, 0.0), 1e-10)
    add(
        "fields",
        "smoothing-inverse",
        np.max(np.abs(apply_bessel_y(apply_bessel_y(u, 1.3), -1.3).coeffs - u.coeffs)),
        1e-12,
    )
    add("fields", "rho-monotone", max(hxy_norm(u, SobolevSpec(0, 0.7)) - hxy_norm(u, SobolevSpec(0, 1.4)), 0.0), 1e-12)

    add("propagators", "group-law+symbol", _propagator_symbol_slack(free_propagate), 1e-12)
    w = free_propagate(u, 0.7)
    add("propagators", "unitarity", abs(w.l2_norm() - u.l2_norm()) / u.l2_norm(), 1e-12)
    add("propagators", "sobolev-invariance", abs(hxy_norm(w, spec) - hxy_norm(u, spec)) / hxy_norm(u, spec), 1e-12)
    add(
        "propagators",
        "mode-stack-round-trip",
        np.max(np.abs(mode_reconstruct(mode_decompose(u)).coeffs - u.coeffs)),
        1e-12,
    )
    add(
        "propagators",
        "reduced-vs-full",
        np.max(np.abs(reduced_free_full(u, 0.37, "modes").coeffs - free_propagate(u, 0.37).coeffs))
        / np.max(np.abs(u.coeffs)),
        1e-12,
    )
    g3 = _grid3()
    u3 = _rand_field(g3, 3)
    add(
        "propagators",
        "split-reduced-vs-full",
        np.max(np.abs(reduced_free_full(u3, 0.21, "split").coeffs - free_propagate(u3, 0.21).coeffs))
        / np.max(np.abs(u3.coeffs)),
        1e-12,
    )

    times = np.linspace(0.0, 1.0, 9)
    traj = free_trajectory(u, times)
    add(
        "mixednorms",
        "sup-l2-endpoint",
        abs(mixed_norm(traj, INF, 2.0) - u.l2_norm()) / u.l2_norm(),
        1e-12,
    )
    stack = rng.standard_normal((4, 9, 16, 16)) + 1j * rng.standard_normal((4, 9, 16, 16))
    add("mixednorms", "minkowski", max(minkowski_gap(stack, times, g2, 4.0, 4.0), 0.0), 1e-12)
    profs = np.abs(rng.standard_normal((3, 9, 16, 16))) + 0.1
    lhs = profile_mixed_norm(profs[0] * profs[1] * profs[2], times, g2, 4.0 / 3.0, 4.0 / 3.0)
    rhs = 1.0
    for j in range(3):
        rhs *= profile_mixed_norm(profs[j], times, g2, 4.0, 4.0)
    add("mixednorms", "holder-splitting", max(lhs - rhs, 0.0), 1e-12 * max(rhs, 1.0))

    cfg = EvolutionConfig(kappa=1, final_time=0.5, dt=1 / 16, dealias=True)
    small = _rand_field(g2, 4, delta=0.05)
    sol = evolve(small, cfg)
    mass = [float(np.sum(_kernels.abs2(sol.coeffs[i]))) for i in (0, -1)]
    add("solver", "mass-conservation", abs(mass[1] - mass[0]) / mass[0], 1e-12)
    cfg0 = EvolutionConfig(kappa=0, final_time=0.5, dt=1 / 16, dealias=False)
    lin = evolve(small, cfg0)
    ref = free_trajectory(small, cfg0.snapshot_times())
    add("solver", "free-limit", np.max(np.abs(lin.coeffs - ref.coeffs)) / np.max(np.abs(small.coeffs)), 1e-12)
    u_bar = to_spectral(np.conj(from_spectral(u)), g2)
    conj_of_cubic = to_spectral(np.conj(from_spectral(nonlinearity(u, 1))), g2)
    add(
        "solver",
        "cubic-conjugation",
        np.max(np.abs(nonlinearity(u_bar, 1).coeffs - conj_of_cubic.coeffs))
        / max(np.max(np.abs(conj_of_cubic.coeffs)), 1e-300),
        1e-12,
    )
    dh = duhamel_apply(small, free_trajectory(small, cfg0.snapshot_times()), 0)
    add("solver", "integral-map-free-limit", np.max(np.abs(dh.coeffs - ref.coeffs)) / np.max(np.abs(small.coeffs)), 1e-12)

    pb = [pullback(ref, t) for t in (0.0, 0.25, 0.5)]
    add(
        "scattering",
        "free-pullback-constant",
        max(np.max(np.abs(p.coeffs - small.coeffs)) for p in pb) / np.max(np.abs(small.coeffs)),
        1e-12,
    )

    res = scans.strichartz_scan(g2, 4.0, 4.0, samples=2, seed=0, final_time=1.0, n_times=9)
    add("estimates", "modulation-uniformity", res.extras["modulation_spread"], 1e-12)
    ms = scans.mixed_estimate_scan(g2, (0, 0), 1.1, 4.0, 4.0, samples=2, seed=0, final_time=1.0, n_times=9)
    add("estimates", "smoothing-order-reduction", ms.extras["reduction_gap"], 1e-12)
    g4 = make_grid(4, 1, 4 * np.pi, 8, 4)
    hs = [scans.band_limit_x(scans.x_only_random(g4, 20 + j), g4, 1) for j in range(3)]
    add("estimates", "product-rule-expansion", scans.leibniz_residual(hs[0], hs[1], hs[2], (1, 0, 0, 0), g4), 1e-10)

    mutated_slack = _propagator_symbol_slack(_mutated_free_propagate)
    add(
        "selftest",
        "negative-control-sign-flip-caught",
        mutated_slack,
        1e-12,
        passed=bool(mutated_slack > 1e-12),
    )

    return checks


def run_selftest() -> dict:
    checks = run_checks()
    failed = [c for c in checks if not c.passed]
    return {
        "passed": not failed,
        "checks": [c.as_dict() for c in checks],
        "failures": [c.as_dict() for c in failed],
    }
