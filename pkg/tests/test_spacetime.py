"""Mixed norms, admissibility arithmetic, solution-space norms."""

import numpy as np
import pytest

from prodnls.grid import from_spectral, make_grid, to_spectral
from prodnls.sobolev import SobolevSpec, bessel_y_weight, hxy_norm
from prodnls.spacetime import (
    INF,
    AdmissibilityError,
    AdmissiblePair,
    Trajectory,
    admissible_q,
    free_trajectory,
    holder_conjugate,
    instantaneous_qnorm,
    minkowski_gap,
    mixed_norm,
    mixed_norm_split,
    profile_mixed_norm,
    solution_space_norm,
    x_eps_norm,
    x_norm_odd,
)

from conftest import pure_mode, random_samples


def mixed_norm_dense_oracle(traj, p, q):
    """Fully physical-space evaluation: Riemann sums in (x, y), trapezoid in
    t, maxima for infinite exponents. Independent of the Parseval route."""
    g = traj.grid
    per_time = []
    for i in range(len(traj)):
        phys = from_spectral(traj.field(i))
        prof = np.sqrt(np.sum(np.abs(phys) ** 2, axis=tuple(range(g.n, g.n + g.k))) * g.y_cell_volume)
        if q == INF:
            per_time.append(prof.max())
        else:
            per_time.append((np.sum(prof**q) * g.x_cell_volume) ** (1 / q))
    per_time = np.array(per_time)
    if p == INF:
        return float(per_time.max())
    return float(np.trapezoid(per_time**p, traj.times) ** (1 / p))


def const_trajectory(field, times):
    return Trajectory(field.grid, times, np.repeat(field.coeffs[None], len(times), axis=0))


class TestAdmissibility:
    def test_reference_pairs(self):
        assert admissible_q(2, 4.0) == pytest.approx(4.0)
        assert admissible_q(4, 2.0) == pytest.approx(4.0)
        assert admissible_q(1, 4.0) == INF
        assert admissible_q(2, INF) == pytest.approx(2.0)

    def test_derivative_relation(self):
        # 2/p + n/q = 1 + |alpha|: n=4, |alpha|=1, p=4 -> q = 16/6
        assert admissible_q(4, 4.0, "derivative", order=1) == pytest.approx(16 / 6)

    @pytest.mark.parametrize(
        "n,p,kind",
        [(2, 2.0, "strichartz"), (1, 3.0, "strichartz"), (3, 1.5, "strichartz"), (4, 2.0, "derivative")],
    )
    def test_out_of_range_p(self, n, p, kind):
        with pytest.raises(AdmissibilityError):
            admissible_q(n, p, kind)

    def test_pair_validation(self):
        AdmissiblePair(2, 4.0, 4.0)
        with pytest.raises(AdmissibilityError):
            AdmissiblePair(2, 4.0, 5.0)

    def test_derivative_n2_alpha0_matches_plain_relation(self):
        # at n=2 the derivative relation with |alpha|=0 is the plain one
        for p in (3.0, 4.0, 8.0):
            assert admissible_q(2, p, "derivative", 0) == pytest.approx(admissible_q(2, p, "strichartz"))

    def test_holder_conjugate(self):
        assert holder_conjugate(4.0) == pytest.approx(4 / 3)
        assert holder_conjugate(1.0) == INF
        assert holder_conjugate(INF) == 1.0


class TestMixedNorm:
    def test_zero_trajectory(self, grid2):
        times = np.linspace(0, 1, 5)
        traj = Trajectory(grid2, times, np.zeros((5,) + grid2.shape, complex))
        assert mixed_norm(traj, 4.0, 4.0) == 0.0

    def test_sup_l2_endpoint(self, rand_field):
        times = np.linspace(0, 1, 9)
        traj = free_trajectory(rand_field, times)
        assert mixed_norm(traj, INF, 2.0) == pytest.approx(rand_field.l2_norm(), rel=1e-12)

    def test_time_constant_separates(self, rand_field):
        # closed form T^{1/p} ||u||_{L^q_x L^2_y}, cross-checked against the
        # dense quadrature oracle
        times = np.linspace(0, 2, 17)
        traj = const_trajectory(rand_field, times)
        got = mixed_norm(traj, 4.0, 4.0)
        closed = 2.0 ** (1 / 4) * instantaneous_qnorm(rand_field, 4.0)
        assert got == pytest.approx(closed, rel=1e-10)
        assert got == pytest.approx(mixed_norm_dense_oracle(traj, 4.0, 4.0), rel=1e-10)

    @pytest.mark.parametrize("p,q", [(4.0, 4.0), (4 / 3, 4 / 3), (INF, 4.0), (6.0, INF)])
    def test_matches_dense_oracle(self, rand_field, p, q):
        times = np.linspace(0, 1.5, 13)
        traj = free_trajectory(rand_field, times)
        assert mixed_norm(traj, p, q) == pytest.approx(mixed_norm_dense_oracle(traj, p, q), rel=1e-10)

    def test_monotone_under_modulus_domination(self, grid2):
        times = np.linspace(0, 1, 5)
        a = random_samples(grid2, 0)
        small = Trajectory(grid2, times, np.stack([to_spectral(a * s, grid2).coeffs for s in (0.2,) * 5]))
        big = Trajectory(grid2, times, np.stack([to_spectral(a * s, grid2).coeffs for s in (0.5,) * 5]))
        assert mixed_norm(small, 4.0, 4.0) <= mixed_norm(big, 4.0, 4.0)

    def test_quadrature_second_order_in_time(self, rand_field):
        """Trapezoid order: halving dt shrinks the error like dt^2."""
        norms = {}
        for n_t in (9, 17, 33, 257):
            times = np.linspace(0, 2, n_t)
            norms[n_t] = mixed_norm(free_trajectory(rand_field, times), 4.0, 4.0)
        errors = np.array([abs(norms[n] - norms[257]) for n in (9, 17, 33)])
        dts = np.array([2 / (n - 1) for n in (9, 17, 33)])
        slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
        assert slope >= 1.8


class TestXNorms:
    def test_zero(self, grid2):
        times = np.linspace(0, 1, 5)
        traj = Trajectory(grid2, times, np.zeros((5,) + grid2.shape, complex))
        assert x_eps_norm(traj, 0.1) == 0.0

    def test_n2_single_term_structure(self, rand_field):
        """For n=2 the norm is exactly the smoothed L^4_t L^4_x L^2_y norm."""
        g = rand_field.grid
        times = np.linspace(0, 1, 9)
        traj = free_trajectory(rand_field, times)
        direct = x_eps_norm(traj, 0.1)
        explicit = mixed_norm(traj.weighted(bessel_y_weight(g, g.k / 2 + 0.1)), 4.0, 4.0)
        assert direct == pytest.approx(explicit, rel=1e-12)

    def test_time_constant_pure_mode_closed_form(self):
        grid = make_grid(2, 1, 8 * np.pi, 16, 8)
        eps = 0.1
        amp = 0.7
        f = pure_mode(grid, (1, 2), (1,), amplitude=amp)
        times = np.linspace(0, 2, 9)
        traj = const_trajectory(f, times)
        # smoothing scales the single coefficient by (1+|m|^2)^{(k/2+eps)/2};
        # a pure mode has constant modulus |A|/sqrt(L^n (2pi)^k) so
        # L^2_y-profile = |A|/sqrt(L^n), L^4_x = |A| L^{-n/4}, time factor T^{1/4}
        A = amp * (1 + 1) ** ((grid.k / 2 + eps) / 2)
        closed = 2.0 ** 0.25 * A * grid.box_length ** (-grid.n / 4)
        assert x_eps_norm(traj, eps) == pytest.approx(closed, rel=1e-10)

    def test_requires_even_n(self, grid3):
        times = np.linspace(0, 1, 5)
        traj = Trajectory(grid3, times, np.zeros((5,) + grid3.shape, complex))
        with pytest.raises(Exception):
            x_eps_norm(traj, 0.1)

    def test_odd_variant_zero_and_split_requirement(self, grid3):
        times = np.linspace(0, 1, 5)
        traj = Trajectory(grid3, times, np.zeros((5,) + grid3.shape, complex))
        assert x_norm_odd(traj, 0.1) == 0.0
        plain = make_grid(3, 1, 4 * np.pi, 8, 4)
        traj2 = Trajectory(plain, times, np.zeros((5,) + plain.shape, complex))
        with pytest.raises(Exception):
            x_norm_odd(traj2, 0.1)

    def test_odd_time_constant_pure_mode_closed_form(self):
        grid = make_grid(3, 1, 2 * np.pi, 8, 4, split_index=2)
        eps = 0.1
        amp = 1.3
        f = pure_mode(grid, (1, 0, 2), (1,), amplitude=amp)
        times = np.linspace(0, 2, 9)
        traj = const_trajectory(f, times)
        # n=3: single term s=0, xbar-exponent q = 2(n-1)/(1+2s) = 4
        xi_n = grid.xi_axis[2]
        A = amp * (1 + xi_n**2 + 1) ** ((grid.k + 1) / 4 + eps)
        # |phys| = A / sqrt(L^3 (2pi)^k); L^2 over (x_n, y) brings L * (2pi)^k
        profile = A / np.sqrt(grid.box_length**2)
        closed = 2.0 ** 0.25 * profile * (grid.box_length**2) ** (1 / 4)
        assert x_norm_odd(traj, eps) == pytest.approx(closed, rel=1e-10)

    def test_solution_space_norm_is_max(self, rand_field):
        times = np.linspace(0, 1, 9)
        traj = free_trajectory(rand_field, times)
        spec = SobolevSpec(0, 0.6)
        combined = solution_space_norm(traj, spec, 0.1)
        sup_h = max(hxy_norm(traj.field(i), spec) for i in range(len(traj)))
        assert combined == pytest.approx(max(sup_h, x_eps_norm(traj, 0.1)), rel=1e-12)


class TestMinkowski:
    def test_single_slice_gap_zero(self, grid2):
        times = np.linspace(0, 1, 5)
        rng = np.random.default_rng(0)
        stack = rng.standard_normal((1, 5, 16, 16)) + 1j * rng.standard_normal((1, 5, 16, 16))
        assert abs(minkowski_gap(stack, times, grid2, 4.0, 4.0)) <= 1e-12

    def test_random_stack_nonpositive(self, grid2):
        times = np.linspace(0, 1, 5)
        rng = np.random.default_rng(1)
        stack = rng.standard_normal((4, 5, 16, 16)) + 1j * rng.standard_normal((4, 5, 16, 16))
        assert minkowski_gap(stack, times, grid2, 4.0, 4.0) <= 1e-12

    def test_fubini_case_equality(self, grid2):
        times = np.linspace(0, 1, 5)
        rng = np.random.default_rng(2)
        stack = rng.standard_normal((4, 5, 16, 16)) + 1j * rng.standard_normal((4, 5, 16, 16))
        assert abs(minkowski_gap(stack, times, grid2, 2.0, 2.0)) <= 1e-12

    def test_rejects_small_exponents(self, grid2):
        times = np.linspace(0, 1, 5)
        stack = np.zeros((2, 5, 16, 16), complex)
        with pytest.raises(AdmissibilityError):
            minkowski_gap(stack, times, grid2, 1.5, 4.0)


class TestHolderSplitting:
    @pytest.mark.parametrize("seed", range(5))
    def test_triple_product_bound(self, grid2, seed):
        """(n+1)/(2n) = sum (1+2|b_j|)/(2n): the product's L^{4/3}_t L^{2n/(n+1)}_x
        norm is bounded by the product of the factors' L^4_t L^{2n/(1+2|b_j|)}_x
        norms (all |b_j| = 0 at n = 2), with roundoff slack only."""
        times = np.linspace(0, 1, 9)
        rng = np.random.default_rng(seed)
        profs = np.abs(rng.standard_normal((3, 9, 16, 16))) + 0.05
        n = grid2.n
        lhs = profile_mixed_norm(profs[0] * profs[1] * profs[2], times, grid2, 4 / 3, 2 * n / (n + 1))
        rhs = 1.0
        for j in range(3):
            rhs *= profile_mixed_norm(profs[j], times, grid2, 4.0, 2 * n / 1)
        assert lhs <= rhs * (1 + 1e-12)


class TestTrajectoryType:
    def test_nonuniform_times_rejected(self, grid2):
        with pytest.raises(Exception):
            Trajectory(grid2, np.array([0.0, 0.1, 0.5]), np.zeros((3,) + grid2.shape, complex))

    def test_index_of(self, rand_field):
        traj = free_trajectory(rand_field, np.linspace(0, 1, 5))
        assert traj.index_of(0.5) == 2
        with pytest.raises(Exception):
            traj.index_of(0.3)

    def test_split_mixed_norm_requires_split(self, rand_field):
        traj = free_trajectory(rand_field, np.linspace(0, 1, 5))
        with pytest.raises(Exception):
            mixed_norm_split(traj, 4.0, 4.0)
