"""Variation norms, metrics, 2D rho-variation and greedy threshold times.

Every dynamic-programming result is checked against exhaustive partition
enumeration from oracles.py on instances small enough to enumerate.
"""

import numpy as np
import pytest

from roughwz.fbm import FbmParams, FbmSampler, SamplePath, TimeGrid
from roughwz.lift import GridRoughPath, lift_left_riemann
from roughwz.norms import (
    StoppingTimes,
    VariationParams,
    greedy_stopping_times,
    holder_seminorm,
    homogeneous_pvar_norm,
    pvar_level2,
    pvar_level2_distance,
    pvar_seminorm,
    rho_alpha_metric,
    rho_pvar_metric,
    rho_var_2d,
)

from oracles import greedy_stops_brute, homogeneous_brute, pvar2_brute, pvar_brute, rho_var_2d_brute


def linear_lift(n, t_max=1.0):
    grid = TimeGrid(0.0, t_max, n)
    return lift_left_riemann(SamplePath(grid, grid.times[:, None].copy()))


def random_lift(rng, n, d=2):
    vals = np.vstack([np.zeros(d), rng.standard_normal((n, d)).cumsum(axis=0)])
    return lift_left_riemann(SamplePath(TimeGrid(0.0, 1.0, n), vals))


class TestVariationParams:
    def test_q_is_half_p(self):
        vp = VariationParams(p=2.5)
        assert vp.q == pytest.approx(1.25)

    def test_from_holder_inverts_alpha(self):
        vp = VariationParams.from_holder(0.4)
        assert vp.p == pytest.approx(2.5)
        assert vp.alpha == pytest.approx(0.4)

    @pytest.mark.parametrize("kwargs", [{"p": 0.5}, {"p": 2, "alpha": 0.6}, {"p": 2, "rho": 2.5}])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            VariationParams(**kwargs)


class TestLevel1Variation:
    def test_monotone_scalar_is_total_increment(self):
        assert pvar_seminorm(np.array([[0.0], [0.3], [1.0]]), 2.0) == pytest.approx(1.0)

    def test_zigzag_values(self):
        zig = np.array([[0.0], [1.0], [0.0]])
        assert pvar_seminorm(zig, 1.0) == pytest.approx(2.0)
        assert pvar_seminorm(zig, 2.0) == pytest.approx(np.sqrt(2.0))

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
    def test_matches_enumeration(self, p):
        rng = np.random.default_rng(int(10 * p))
        for _ in range(25):
            n = rng.integers(2, 9)
            vals = rng.standard_normal((n + 1, 2))
            assert pvar_seminorm(vals, p) == pytest.approx(pvar_brute(vals, p), rel=1e-12)

    def test_p_one_is_total_variation(self):
        rng = np.random.default_rng(41)
        vals = rng.standard_normal((12, 3))
        tv = float(np.linalg.norm(np.diff(vals, axis=0), axis=1).sum())
        assert pvar_seminorm(vals, 1.0) == pytest.approx(tv, rel=1e-12)


class TestLevel2Variation:
    def test_linear_lift_frozen_value(self):
        # Half the square of the increment; q = 1 keeps the coarsest block.
        rp = linear_lift(8)
        assert pvar_level2(rp, 1.0) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("q", [1.0, 1.5])
    def test_matches_enumeration(self, q):
        rng = np.random.default_rng(int(17 * q))
        for _ in range(10):
            rp = random_lift(rng, int(rng.integers(3, 8)))
            n = rp.n_steps
            got = pvar_level2(rp, q)
            assert got == pytest.approx(pvar2_brute(rp.level2, q, 0, n), rel=1e-12)

    def test_window_argument(self):
        rng = np.random.default_rng(23)
        rp = random_lift(rng, 9)
        got = pvar_level2(rp, 1.0, i_lo=2, i_hi=7)
        assert got == pytest.approx(pvar2_brute(rp.level2, 1.0, 2, 7), rel=1e-12)


class TestHomogeneousNorm:
    def test_linear_lift_frozen_value(self):
        rp = linear_lift(8)
        assert homogeneous_pvar_norm(rp, 2.0) == pytest.approx(np.sqrt(1.5), rel=1e-12)

    def test_requires_p_at_least_two(self):
        with pytest.raises(ValueError):
            homogeneous_pvar_norm(linear_lift(4), 1.5)

    def test_matches_enumeration(self):
        rng = np.random.default_rng(29)
        for p in (2.0, 2.7):
            rp = random_lift(rng, 6)
            got = homogeneous_pvar_norm(rp, p)
            want = homogeneous_brute(rp.values, rp.level2, p, 0, rp.n_steps)
            assert got == pytest.approx(want, rel=1e-12)

    def test_pth_power_superadditive(self):
        # Concatenation can only grow the p-th power; the stopping-time
        # count bound rests on exactly this inequality.
        rng = np.random.default_rng(31)
        for _ in range(20):
            rp = random_lift(rng, 12)
            p = float(rng.uniform(2.0, 3.5))
            i, j, k = sorted(rng.choice(13, size=3, replace=False))
            whole = homogeneous_pvar_norm(rp, p, i, k) ** p
            parts = (
                homogeneous_pvar_norm(rp, p, i, j) ** p
                + homogeneous_pvar_norm(rp, p, j, k) ** p
            )
            assert whole >= parts - 1e-10


class TestHolderSeminorm:
    def test_single_step(self):
        times = np.array([0.0, 0.1])
        vals = np.array([[0.0], [1.0]])
        assert holder_seminorm(times, vals, 0.4) == pytest.approx(0.1 ** (-0.4), rel=1e-12)

    def test_linear_path_attains_at_full_gap(self):
        times = np.linspace(0.0, 1.0, 11)
        vals = 3.0 * times[:, None]
        # sup_{s<t} |v| (t-s)^{1-alpha} sits at the widest pair for alpha < 1.
        assert holder_seminorm(times, vals, 0.5) == pytest.approx(3.0, rel=1e-12)

    def test_dominates_increment_scaling(self):
        rng = np.random.default_rng(37)
        times = np.linspace(0.0, 1.0, 9)
        vals = rng.standard_normal((9, 2))
        c = holder_seminorm(times, vals, 0.45)
        for i in range(9):
            for j in range(i + 1, 9):
                gap = times[j] - times[i]
                assert np.linalg.norm(vals[j] - vals[i]) <= c * gap**0.45 + 1e-12


class TestRoughMetrics:
    def make_pair(self, eps=0.25):
        grid = TimeGrid(0.0, 1.0, 6)
        vals = np.linspace(0.0, 1.0, 7)[:, None]
        a = lift_left_riemann(SamplePath(grid, vals))
        inc2 = a.inc2.copy()
        inc2[2] = inc2[2] + np.array([[eps]])
        return a, GridRoughPath(grid, a.inc1.copy(), inc2)

    def test_zero_on_identical(self):
        a, _ = self.make_pair()
        assert rho_alpha_metric(a, a, 0.4) == 0.0
        assert rho_pvar_metric(a, a, 2.0) == 0.0
        assert pvar_level2_distance(a, a, 1.0) == 0.0

    def test_single_block_perturbation(self):
        # Equal first levels make every enclosing Chen block differ by the
        # same matrix, so the variation distance is its Frobenius norm and
        # the alpha distance is that norm over the step width to the 2 alpha.
        a, b = self.make_pair(eps=0.25)
        assert rho_pvar_metric(a, b, 2.0) == pytest.approx(0.25, rel=1e-12)
        assert pvar_level2_distance(a, b, 1.0) == pytest.approx(0.25, rel=1e-12)
        h = 1.0 / 6.0
        assert rho_alpha_metric(a, b, 0.4) == pytest.approx(0.25 / h**0.8, rel=1e-12)

    def test_symmetry(self):
        a, b = self.make_pair()
        assert rho_pvar_metric(a, b, 2.0) == rho_pvar_metric(b, a, 2.0)
        assert rho_alpha_metric(a, b, 0.4) == rho_alpha_metric(b, a, 0.4)

    def test_pvar_distance_matches_enumeration(self):
        rng = np.random.default_rng(43)
        for _ in range(8):
            n = int(rng.integers(3, 7))
            ra = random_lift(rng, n)
            rb = random_lift(rng, n)
            diff = lambda i, j: ra.level2(i, j) - rb.level2(i, j)
            got = pvar_level2_distance(ra, rb, 1.5)
            assert got == pytest.approx(pvar2_brute(diff, 1.5, 0, n), rel=1e-12)


class TestRhoVar2D:
    def test_min_kernel_is_unit(self):
        res = rho_var_2d(np.minimum, np.linspace(0.0, 1.0, 5))
        assert res.exact
        assert res.value == pytest.approx(1.0, rel=1e-12)

    def test_product_kernel_is_unit(self):
        res = rho_var_2d(lambda s, t: s * t, np.linspace(0.0, 1.0, 5))
        assert res.value == pytest.approx(1.0, rel=1e-12)

    def test_constant_kernel_vanishes(self):
        res = rho_var_2d(lambda s, t: np.ones_like(s * t), np.linspace(0.0, 1.0, 5))
        assert res.value == 0.0

    @pytest.mark.parametrize("rho", [1.0, 1.4])
    def test_matches_pair_enumeration(self, rho):
        rng = np.random.default_rng(int(47 * rho))
        times = np.linspace(0.0, 1.0, 5)
        mat = rng.standard_normal((5, 5))
        mat = mat + mat.T
        cov = lambda s, t: mat[np.asarray(s * 4, int), np.asarray(t * 4, int)]
        got = rho_var_2d(cov, times, rho=rho)
        want = rho_var_2d_brute(lambda s, t: float(mat[int(s * 4), int(t * 4)]), times, rho)
        assert got.exact
        assert got.value == pytest.approx(want, rel=1e-12)

    def test_large_grids_fall_back_to_lower_bound(self):
        times = np.linspace(0.0, 1.0, 40)
        res = rho_var_2d(np.minimum, times)
        assert not res.exact
        assert res.value <= 1.0 + 1e-12
        assert res.value > 0.9

    def test_exact_mode_capped(self):
        with pytest.raises(ValueError):
            rho_var_2d(np.minimum, np.linspace(0.0, 1.0, 18), exact=True)


class TestGreedyStopping:
    def test_linear_path_spacing(self):
        # Homogeneous norm of the unit-slope line over a width-w window is
        # w sqrt(1.5), so thresholds land every 0.5/sqrt(1.5) ~ 0.40825.
        st = greedy_stopping_times(linear_lift(1000), 0.5, 2.0)
        assert st.indices.tolist() == [0, 409, 818, 1000]
        assert st.count == 3
        assert st.times[1] == pytest.approx(0.409)

    def test_linear_path_even_eta(self):
        st = greedy_stopping_times(linear_lift(100), 0.3, 2.0)
        assert st.indices.tolist() == [0, 25, 50, 75, 100]
        assert st.count == 4

    def test_threshold_above_total_norm(self):
        rp = linear_lift(16)
        st = greedy_stopping_times(rp, 10.0, 2.0)
        assert st.indices.tolist() == [0, 16]
        assert st.count == 1

    def test_matches_brute_force(self):
        rng = np.random.default_rng(53)
        for _ in range(10):
            rp = random_lift(rng, int(rng.integers(4, 9)))
            eta = float(rng.uniform(0.4, 1.5))
            st = greedy_stopping_times(rp, eta, 2.0)
            want = greedy_stops_brute(rp.values, rp.level2, 2.0, eta)
            assert st.indices.tolist() == want

    def test_count_bound_holds(self):
        grid = TimeGrid(0.0, 1.0, 64)
        sampler = FbmSampler(grid, FbmParams(H=0.4, d=2, seed=13))
        for counter in range(25):
            rp = lift_left_riemann(sampler.sample(counter))
            for eta in (0.3, 0.6, 1.0):
                st = greedy_stopping_times(rp, eta, 2.5)
                whole = homogeneous_pvar_norm(rp, 2.5)
                assert st.count <= 1 + eta ** (-2.5) * whole**2.5 + 1e-9

    def test_window_and_structure(self):
        rng = np.random.default_rng(59)
        rp = random_lift(rng, 32)
        st = greedy_stopping_times(rp, 0.8, 2.0, i_lo=4, i_hi=28)
        assert st.indices[0] == 4
        assert st.indices[-1] == 28
        assert np.all(np.diff(st.indices) > 0)
        assert np.array_equal(st.times, rp.grid.times[st.indices])
        assert st.count == len(st.times) - 1
        assert isinstance(st, StoppingTimes)

    def test_each_stop_first_to_reach_eta(self):
        rng = np.random.default_rng(61)
        rp = random_lift(rng, 24)
        eta, p = 1.0, 2.0
        st = greedy_stopping_times(rp, eta, p)
        for lo, hi in zip(st.indices[:-1], st.indices[1:]):
            if hi < rp.n_steps:
                assert homogeneous_pvar_norm(rp, p, lo, hi) >= eta
            if hi - lo > 1:
                assert homogeneous_pvar_norm(rp, p, lo, hi - 1) < eta
