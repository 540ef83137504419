"""Empirical ratio scans for every inequality the solver construction rests on.

Each scan draws a seeded random ensemble, evaluates left- and right-hand
sides of one estimate, and reports the per-sample quotients. The recorded
maximum is an ensemble-relative stand-in for the (unquantified) analytic
constant; "stability under one grid doubling within 20%" is the operational
criterion that the discrete scan sees a bounded constant rather than a
divergence. Exact structural facts (modulation uniformity, smoothing-order
reduction, the product-rule expansion) are checked to roundoff instead.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import _kernels
from ._parallel import parallel_map
from .grid import GridError, GridSpec, SpectralField, from_spectral, to_spectral
from .propagate import _duhamel_accumulate, modulated_propagate_x
from .sobolev import (
    SobolevSpec,
    _dx_weight,
    apply_bessel_y,
    bessel_split_weight,
    bessel_y_weight,
    hxy_norm,
    multi_indices,
    random_small_data,
)
from .spacetime import (
    AdmissiblePair,
    Trajectory,
    admissible_q,
    free_trajectory,
    holder_conjugate,
    mixed_norm,
    mixed_norm_split,
    profile_mixed_norm,
    x_eps_norm,
    x_norm_odd,
)


@dataclass
class RatioScanResult:
    inequality_id: str
    samples: int
    lhs: List[float]
    rhs: List[float]
    ratios: List[float]
    max_ratio: float
    grid_meta: Dict
    parts: List[str] = field(default_factory=list)  # row labels, len == len(ratios)
    stability_delta: Optional[float] = None
    extras: Dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "samples": self.samples,
            "max_ratio": self.max_ratio,
            "stability_delta": self.stability_delta,
            "grid": self.grid_meta,
            **self.extras,
        }


def _grid_meta(grid: GridSpec, final_time: float, n_times: int) -> dict:
    return {
        "n": grid.n,
        "k": grid.k,
        "box_length": grid.box_length,
        "points_per_axis": grid.points_per_axis,
        "torus_modes": grid.torus_modes,
        "split_index": grid.split_index,
        "final_time": final_time,
        "n_times": n_times,
    }


def _scan_times(final_time: float, n_times: int) -> np.ndarray:
    return np.linspace(0.0, final_time, n_times)


def _ensemble_field(grid: GridSpec, seed: int, rho: float = None) -> SpectralField:
    """One normalized draw of the documented scan ensemble."""
    if rho is None:
        rho = grid.k / 2 + 0.1
    return random_small_data(grid, SobolevSpec(0, rho), 1.0, seed=seed)


def _time_profile(times: np.ndarray) -> np.ndarray:
    """Smooth compactly-started bump shaping inhomogeneous-term samples."""
    span = times[-1] - times[0] if times[-1] > times[0] else 1.0
    return np.sin(np.pi * (times - times[0]) / span) ** 2


# -- x-only helpers (box factor alone) ---------------------------------------


def x_only_norm_factor(grid: GridSpec) -> float:
    return math.sqrt(grid.x_cell_volume / grid.points_per_axis**grid.n)


def x_only_random(grid: GridSpec, seed: int, decay_rate: float = None, band_limit: float = None) -> np.ndarray:
    """Random x-only coefficients, unit L^2, with the ensemble decay.

    `band_limit` applies the same super-Gaussian window as the product-space
    ensemble; passing a fixed value makes the ensemble resolution-independent,
    which is what the refinement-stability protocol wants to measure."""
    if decay_rate is None:
        decay_rate = grid.n / 2 + 1
    rng = np.random.default_rng(seed)
    shape = (grid.points_per_axis,) * grid.n
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coeffs = raw * (1.0 + grid.xi_sq_x_only) ** (-decay_rate / 2)
    if band_limit is not None:
        coeffs = coeffs * np.exp(-((np.sqrt(grid.xi_sq_x_only) / band_limit) ** 8))
    return coeffs / np.linalg.norm(coeffs)


def _x_center_signs(grid: GridSpec) -> np.ndarray:
    full = grid.center_signs
    index = (slice(None),) * grid.n + (0,) * grid.k
    return full[index]


def x_only_profiles(stack: np.ndarray, grid: GridSpec) -> np.ndarray:
    """|values| on the physical x-lattice for a (N_t, x-shape) coefficient stack."""
    phys = np.fft.ifftn(stack * _x_center_signs(grid), axes=tuple(range(1, grid.n + 1)))
    return np.abs(phys) / x_only_norm_factor(grid)


def x_only_mixed_norm(stack: np.ndarray, times: np.ndarray, grid: GridSpec, p: float, q: float) -> float:
    return profile_mixed_norm(x_only_profiles(stack, grid), times, grid, p, q)


def x_sobolev_norm(coeffs: np.ndarray, grid: GridSpec, s: int) -> float:
    """Classical H^s norm on the box factor, (1+|xi|^2)^{s/2} in L^2."""
    return float(np.linalg.norm(coeffs * (1.0 + grid.xi_sq_x_only) ** (s / 2)))


def _dx_weight_x_only(grid: GridSpec, alpha: Sequence[int]) -> np.ndarray:
    w = np.ones((1,) * grid.n, dtype=np.complex128)
    for ax, a in enumerate(alpha):
        if a:
            shape = [1] * grid.n
            shape[ax] = grid.points_per_axis
            w = w * ((1j * grid.xi_axis) ** a).reshape(shape)
    return w


# -- y-only helpers (torus factor alone) -------------------------------------


def y_mode_sq(modes: int, k: int) -> np.ndarray:
    """|m|^2 over the torus mode lattice, shape (modes,)*k."""
    m = np.fft.fftfreq(modes, d=1.0 / modes)
    m_sq = np.zeros((modes,) * k)
    for ax in range(k):
        shape = [1] * k
        shape[ax] = modes
        m_sq = m_sq + (m**2).reshape(shape)
    return m_sq


def y_only_random(modes: int, k: int, seed: int, decay_rate: float = 2.0) -> np.ndarray:
    """Random torus-only coefficients, unit L^2 over T^k of side 2 pi."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((modes,) * k) + 1j * rng.standard_normal((modes,) * k)
    coeffs = raw * (1.0 + y_mode_sq(modes, k)) ** (-decay_rate / 2)
    return coeffs / np.linalg.norm(coeffs)


def _y_product(c1: np.ndarray, c2: np.ndarray, c3: np.ndarray, modes: int, k: int) -> np.ndarray:
    """Pointwise triple product of torus functions, returned in coefficients.

    With sum |c|^2 = ||f||^2 the physical values are ifft(c)/nu with
    nu = sqrt((2 pi / N)^k / N^k); each extra factor contributes 1/nu.
    """
    nu = math.sqrt((2 * math.pi / modes) ** k / modes**k)
    phys = np.fft.ifftn(c1) * np.fft.ifftn(c2) * np.fft.ifftn(c3) / nu**3
    return np.fft.fftn(phys) * nu


# -- the scans ----------------------------------------------------------------


def strichartz_scan(
    grid: GridSpec,
    p: float,
    q: float,
    m_list: Sequence[float] = (-10.0, 0.0, 10.0),
    samples: int = 100,
    seed: int = 0,
    final_time: float = 4.0,
    n_times: int = 33,
) -> RatioScanResult:
    """Homogeneous and inhomogeneous flow-to-datum quotients in L^p_t L^q_x L^2_y,
    plus the exact modulation-uniformity check on the box factor."""
    AdmissiblePair(grid.n, p, q)
    times = _scan_times(final_time, n_times)
    dual_p, dual_q = holder_conjugate(p), holder_conjugate(q)

    lhs, rhs, ratios, parts = [], [], [], []
    for i in range(samples):
        f = _ensemble_field(grid, seed + 2 * i)
        num = mixed_norm(free_trajectory(f, times), p, q)
        den = f.l2_norm()
        lhs.append(num), rhs.append(den), ratios.append(num / den), parts.append("homogeneous")

        g = _ensemble_field(grid, seed + 2 * i + 1)
        profile = _time_profile(times).reshape((-1,) + (1,) * (grid.n + grid.k))
        forcing = profile * g.coeffs
        integral = _duhamel_accumulate(forcing, grid.symbol, times[1] - times[0])
        num = mixed_norm(Trajectory(grid, times, integral), p, q)
        den = mixed_norm(Trajectory(grid, times, forcing), dual_p, dual_q)
        lhs.append(num), rhs.append(den), ratios.append(num / den), parts.append("inhomogeneous")

    # modulation uniformity: all mixed norms literally equal across the shifts
    h = x_only_random(grid, seed + 7919)
    norms = []
    for m in m_list:
        stack = np.stack([modulated_propagate_x(h, grid, t, m) for t in times])
        norms.append(x_only_mixed_norm(stack, times, grid, p, q))
    spread = (max(norms) - min(norms)) / max(norms)

    return RatioScanResult(
        inequality_id="strichartz",
        samples=samples,
        lhs=lhs,
        rhs=rhs,
        ratios=ratios,
        max_ratio=max(ratios),
        grid_meta=_grid_meta(grid, final_time, n_times),
        parts=parts,
        extras={"modulation_spread": spread, "m_list": list(m_list), "m_independent": bool(spread <= 1e-12)},
    )


def derivative_strichartz_scan(
    grid: GridSpec,
    alpha: Sequence[int],
    p: float,
    q: float,
    samples: int = 100,
    seed: int = 0,
    final_time: float = 4.0,
    n_times: int = 33,
    band_limit: float = None,
) -> RatioScanResult:
    """Box-factor scan with derivatives: d^alpha of the flow in L^p_t L^q_x
    against the H^{(n-2)/2} datum norm (and the dual-norm source term)."""
    alpha = tuple(int(a) for a in alpha)
    if grid.n % 2:
        raise GridError(f"derivative scan needs even n, got {grid.n}")
    s_top = (grid.n - 2) // 2
    if sum(alpha) > s_top:
        raise GridError(f"|alpha|={sum(alpha)} exceeds (n-2)/2={s_top}")
    AdmissiblePair(grid.n, p, q, kind="derivative", order=sum(alpha))
    tilde_q = admissible_dual_pair(grid.n, p)
    times = _scan_times(final_time, n_times)
    dw = _dx_weight_x_only(grid, alpha)

    lhs, rhs, ratios, parts = [], [], [], []
    for i in range(samples):
        h = x_only_random(grid, seed + 2 * i, band_limit=band_limit)
        stack = np.stack([_kernels.apply_phase(h, grid.xi_sq_x_only, t) for t in times]) * dw
        num = x_only_mixed_norm(stack, times, grid, p, q)
        den = x_sobolev_norm(h, grid, s_top)
        lhs.append(num), rhs.append(den), ratios.append(num / den), parts.append("homogeneous")

        hh = x_only_random(grid, seed + 2 * i + 1, band_limit=band_limit)
        forcing = _time_profile(times).reshape((-1,) + (1,) * grid.n) * hh
        integral = _duhamel_accumulate(forcing, grid.xi_sq_x_only, times[1] - times[0]) * dw
        num = x_only_mixed_norm(integral, times, grid, p, q)
        den = sum(
            x_only_mixed_norm(forcing * _dx_weight_x_only(grid, beta), times, grid, holder_conjugate(4.0), holder_conjugate(tilde_q))
            for beta in multi_indices(grid.n, s_top)
        )
        lhs.append(num), rhs.append(den), ratios.append(num / den), parts.append("inhomogeneous")

    return RatioScanResult(
        inequality_id="derivative-strichartz",
        samples=samples,
        lhs=lhs,
        rhs=rhs,
        ratios=ratios,
        max_ratio=max(ratios),
        grid_meta=_grid_meta(grid, final_time, n_times),
        parts=parts,
        extras={"alpha": list(alpha)},
    )


def admissible_dual_pair(n: int, p_source: float = 4.0) -> float:
    """q-exponent of the plain admissible pair used for source terms."""
    return admissible_q(n, p_source, "strichartz")


def mixed_estimate_scan(
    grid: GridSpec,
    alpha: Sequence[int],
    r: float,
    p: float,
    q: float,
    samples: int = 100,
    seed: int = 0,
    final_time: float = 4.0,
    n_times: int = 33,
) -> RatioScanResult:
    """Product-space scan with transverse smoothing of order r, plus the exact
    reduction check: the r > 0 quotient equals the r = 0 quotient evaluated on
    smoothing-premultiplied data (the multiplier commutes with the flow)."""
    alpha = tuple(int(a) for a in alpha)
    if grid.n % 2:
        raise GridError(f"mixed scan needs even n, got {grid.n}")
    if r < 0:
        raise GridError(f"smoothing order must be nonnegative, got {r}")
    s_top = (grid.n - 2) // 2
    if sum(alpha) > s_top:
        raise GridError(f"|alpha|={sum(alpha)} exceeds (n-2)/2={s_top}")
    if len(alpha) != grid.n:
        raise GridError(f"alpha must have one entry per x-axis ({grid.n}), got {len(alpha)}")
    AdmissiblePair(grid.n, p, q, kind="derivative", order=sum(alpha))
    times = _scan_times(final_time, n_times)
    dw = _dx_weight(grid, alpha)
    bw = bessel_y_weight(grid, r)
    spec_rhs = SobolevSpec(s_top, r)

    lhs, rhs, ratios, parts = [], [], [], []
    reduction_gap = 0.0
    for i in range(samples):
        f = _ensemble_field(grid, seed + i)
        traj = free_trajectory(f, times)
        num = mixed_norm(traj.weighted(dw * bw), p, q)
        den = hxy_norm(f, spec_rhs)
        lhs.append(num), rhs.append(den), ratios.append(num / den), parts.append("homogeneous")

        # reduction to r=0 on premultiplied data
        f0 = apply_bessel_y(f, r)
        num0 = mixed_norm(free_trajectory(f0, times).weighted(dw), p, q)
        den0 = hxy_norm(f0, SobolevSpec(s_top, 0.0))
        reduction_gap = max(reduction_gap, abs(num / den - num0 / den0) / (num / den))

    return RatioScanResult(
        inequality_id="mixed-smoothing",
        samples=samples,
        lhs=lhs,
        rhs=rhs,
        ratios=ratios,
        max_ratio=max(ratios),
        grid_meta=_grid_meta(grid, final_time, n_times),
        parts=parts,
        extras={"alpha": list(alpha), "r": r, "reduction_gap": reduction_gap},
    )


def algebra_ratio(f1: np.ndarray, f2: np.ndarray, f3: np.ndarray, s: float, modes: int, k: int) -> float:
    """Torus product-norm quotient
    ||(1-Lap)^{s/2}(f1 f2 f3)||_2 / prod ||(1-Lap)^{s/2} f_j||_2
    for coefficient arrays of shape (modes,)*k."""
    w = (1.0 + y_mode_sq(modes, k)) ** (s / 2)
    den = math.prod(float(np.linalg.norm(c * w)) for c in (f1, f2, f3))
    if den == 0:
        raise ZeroDivisionError("algebra quotient needs nonzero factors")
    prod = _y_product(f1, f2, f3, modes, k)
    return float(np.linalg.norm(prod * w)) / den


def algebra_scan(modes: int, k: int, s: float, samples: int = 100, seed: int = 0) -> RatioScanResult:
    lhs, rhs, ratios = [], [], []
    w = (1.0 + y_mode_sq(modes, k)) ** (s / 2)
    for i in range(samples):
        fs = [y_only_random(modes, k, seed + 3 * i + j) for j in range(3)]
        den = math.prod(float(np.linalg.norm(c * w)) for c in fs)
        num = float(np.linalg.norm(_y_product(fs[0], fs[1], fs[2], modes, k) * w))
        lhs.append(num), rhs.append(den), ratios.append(num / den)
    return RatioScanResult(
        inequality_id="algebra",
        samples=samples,
        lhs=lhs,
        rhs=rhs,
        ratios=ratios,
        max_ratio=max(ratios),
        grid_meta={"torus_modes": modes, "k": k, "s": s},
    )


class AliasingError(ValueError):
    """Inputs occupy too much of the band for exact product differentiation."""


def _band_extent(coeffs: np.ndarray, grid: GridSpec) -> int:
    idx = np.fft.fftfreq(grid.points_per_axis, d=1.0 / grid.points_per_axis).astype(int)
    support = np.abs(coeffs) > 1e-14 * max(np.abs(coeffs).max(), 1e-300)
    extent = 0
    for ax in range(coeffs.ndim):
        axes = tuple(a for a in range(coeffs.ndim) if a != ax)
        live = support.any(axis=axes)
        if live.any():
            extent = max(extent, int(np.abs(idx[live]).max()))
    return extent


def band_limit_x(coeffs: np.ndarray, grid: GridSpec, max_index: int) -> np.ndarray:
    """Zero all modes with any axis index beyond max_index."""
    idx = np.abs(np.fft.fftfreq(grid.points_per_axis, d=1.0 / grid.points_per_axis).astype(int))
    out = coeffs.copy()
    for ax in range(coeffs.ndim):
        shape = [1] * coeffs.ndim
        shape[ax] = grid.points_per_axis
        out = out * (idx <= max_index).reshape(shape)
    return out


def leibniz_residual(g1: np.ndarray, g2: np.ndarray, g3: np.ndarray, beta: Sequence[int], grid: GridSpec) -> float:
    """L^2 distance between d^beta of a triple product computed spectrally and
    its multinomial expansion over derivative splittings. Exact (roundoff)
    when the inputs are band-limited enough that the product does not wrap."""
    beta = tuple(int(b) for b in beta)
    coeffs = [np.asarray(g, dtype=np.complex128) for g in (g1, g2, g3)]
    extent = max(_band_extent(c, grid) for c in coeffs)
    if 3 * extent > grid.points_per_axis // 2 - 1:
        raise AliasingError(
            f"band extent {extent} wraps under a triple product on {grid.points_per_axis} points per axis"
        )
    nu = x_only_norm_factor(grid)
    phys = [np.fft.ifftn(c) / nu for c in coeffs]

    prod_hat = np.fft.fftn(phys[0] * phys[1] * phys[2]) * nu
    direct = prod_hat * _dx_weight_x_only(grid, beta)

    expansion = np.zeros_like(direct)
    for b1, b2, b3, coef in _multinomial_splits(beta):
        parts = [
            np.fft.ifftn(c * _dx_weight_x_only(grid, b)) / nu
            for c, b in zip(coeffs, (b1, b2, b3))
        ]
        expansion = expansion + coef * np.fft.fftn(parts[0] * parts[1] * parts[2]) * nu
    return float(np.linalg.norm(direct - expansion))


def _multinomial_splits(beta: Sequence[int]):
    """All (b1, b2, b3, coefficient) with b1+b2+b3 = beta componentwise and
    coefficient = prod_axis beta_ax! / (b1_ax! b2_ax! b3_ax!)."""
    axes_options = []
    for b in beta:
        opts = []
        for i in range(b + 1):
            for j in range(b - i + 1):
                l = b - i - j
                opts.append((i, j, l, math.factorial(b) // (math.factorial(i) * math.factorial(j) * math.factorial(l))))
        axes_options.append(opts)

    def rec(ax, acc1, acc2, acc3, coef):
        if ax == len(beta):
            yield tuple(acc1), tuple(acc2), tuple(acc3), coef
            return
        for i, j, l, c in axes_options[ax]:
            yield from rec(ax + 1, acc1 + [i], acc2 + [j], acc3 + [l], coef * c)

    yield from rec(0, [], [], [], 1)


def trilinear_ratio(
    u1: Trajectory,
    u2: Trajectory,
    u3: Trajectory,
    eps: float,
    variant: str = "even",
) -> float:
    """Quotient of the product's dual-space norm by the product of
    solution-space norms, maximized over the top-order derivative indices."""
    g = u1.grid
    if u2.grid != g or u3.grid != g:
        raise GridError("trajectories must share one grid")
    if variant not in ("even", "odd"):
        raise ValueError(f"variant must be 'even' or 'odd', got {variant!r}")
    if variant == "even" and g.n % 2:
        raise GridError(f"even variant needs even n, got {g.n}")
    if variant == "odd" and (g.n % 2 == 0 or g.split_index is None):
        raise GridError("odd variant needs odd n and a split grid")

    den = math.prod(
        (x_eps_norm if variant == "even" else x_norm_odd)(u, eps) for u in (u1, u2, u3)
    )
    if den == 0:
        raise ZeroDivisionError("trilinear quotient needs nonzero factors")

    prod_coeffs = _pointwise_product_stack(u1, u2, u3)
    traj = Trajectory(g, u1.times, prod_coeffs)
    best = 0.0
    if variant == "even":
        s_top = (g.n - 2) // 2
        smooth = bessel_y_weight(g, g.k / 2 + eps)
        q = 2 * g.n / (g.n + 1)
        for beta in multi_indices(g.n, s_top):
            val = mixed_norm(traj.weighted(_dx_weight(g, beta) * smooth), 4.0 / 3.0, q)
            best = max(best, val)
    else:
        s_top = (g.n - 3) // 2
        smooth = bessel_split_weight(g, (g.k + 1) / 2 + 2 * eps)
        q = 2 * (g.n - 1) / g.n
        for beta in multi_indices(g.n - 1, s_top):
            w = _dx_weight(g, beta + (0,))
            val = mixed_norm_split(traj.weighted(w * smooth), 4.0 / 3.0, q)
            best = max(best, val)
    return best / den


def _pointwise_product_stack(u1: Trajectory, u2: Trajectory, u3: Trajectory) -> np.ndarray:
    g = u1.grid
    out = np.empty_like(u1.coeffs)
    for i in range(len(u1)):
        prod = (
            from_spectral(u1.field(i))
            * from_spectral(u2.field(i))
            * from_spectral(u3.field(i))
        )
        out[i] = to_spectral(prod, g).coeffs
    return out


def trilinear_scan(
    grid: GridSpec,
    eps: float,
    variant: str = "even",
    samples: int = 100,
    seed: int = 0,
    final_time: float = 2.0,
    n_times: int = 17,
) -> RatioScanResult:
    """Random free-flow triples through the trilinear quotient."""
    times = _scan_times(final_time, n_times)

    def one_sample(i):
        trajs = [free_trajectory(_ensemble_field(grid, seed + 3 * i + j), times) for j in range(3)]
        return trilinear_ratio(*trajs, eps=eps, variant=variant)

    ratios = parallel_map(one_sample, range(samples))
    return RatioScanResult(
        inequality_id=f"trilinear-{variant}",
        samples=samples,
        lhs=ratios,
        rhs=[1.0] * len(ratios),
        ratios=ratios,
        max_ratio=max(ratios),
        grid_meta=_grid_meta(grid, final_time, n_times),
        extras={"eps": eps},
    )
