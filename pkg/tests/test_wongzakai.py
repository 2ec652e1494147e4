"""Smoothing operator, difference quotients and the smoothed lift."""

import numpy as np
import pytest

from roughwz.fbm import FbmParams, FbmSampler, SamplePath, TimeGrid
from roughwz.lift import geometricity_residual, lift_left_riemann
from roughwz.wongzakai import DeltaParam, g_delta, w_delta, ww_delta, x_delta

from oracles import fit_slope, smoothed_value


def hand_path():
    grid = TimeGrid(0.0, 0.75, 3)
    return SamplePath(grid, np.array([[0.0], [1.0], [3.0], [2.0]]))


def linear_path(v, n=16, t_max=1.0):
    grid = TimeGrid(0.0, t_max, n)
    return SamplePath(grid, grid.times[:, None] * np.asarray(v, float)[None, :])


def smooth_path(n, extra=0):
    grid = TimeGrid(0.0, 1.0, n).extended(extra)
    t = grid.times
    return SamplePath(grid, np.column_stack([np.sin(t), t**2]))


class TestDeltaParam:
    def test_width_is_multiple_of_step(self):
        dp = DeltaParam.for_grid(TimeGrid(0.0, 1.0, 8), 4)
        assert dp.multiple == 4
        assert dp.delta == pytest.approx(0.5)

    def test_rejects_nonpositive_multiple(self):
        with pytest.raises(ValueError):
            DeltaParam(0, 0.25)

    def test_rejects_width_above_one(self):
        with pytest.raises(ValueError):
            DeltaParam(9, 0.25)


class TestDifferenceQuotient:
    def test_hand_case(self):
        gd = g_delta(hand_path(), DeltaParam(1, 0.25))
        assert gd.shape == (3, 1)
        assert np.allclose(gd.ravel(), [4.0, 8.0, -4.0])

    def test_single_node_lookup(self):
        p = hand_path()
        dp = DeltaParam(1, 0.25)
        assert g_delta(p, dp, t=0.25) == pytest.approx(8.0)

    def test_out_of_domain_rejected(self):
        p = hand_path()
        with pytest.raises(ValueError):
            g_delta(p, DeltaParam(1, 0.25), t=0.75)

    def test_constant_on_linear_paths(self):
        p = linear_path([2.0, -1.0])
        gd = g_delta(p, DeltaParam(4, p.grid.h))
        assert np.allclose(gd, np.array([2.0, -1.0])[None, :], atol=1e-12)


class TestSmoothing:
    def test_hand_case(self):
        w = w_delta(hand_path(), DeltaParam(1, 0.25))
        assert w.grid.t_max == pytest.approx(0.5)
        assert np.allclose(w.values.ravel(), [0.0, 1.5, 2.0], atol=1e-15)

    def test_residual_hand_case(self):
        x = x_delta(hand_path(), DeltaParam(1, 0.25))
        assert np.allclose(x.values.ravel(), [0.0, -0.5, 1.0], atol=1e-15)

    def test_anchored_at_zero_exactly(self):
        grid = TimeGrid(-0.5, 1.0, 24)
        path = FbmSampler(grid, FbmParams(H=0.4, d=2, seed=21)).sample(0)
        w = w_delta(path, DeltaParam(3, grid.h))
        assert w.values[w.grid.zero_index].tolist() == [0.0, 0.0]

    def test_linear_paths_are_fixed_points(self):
        # Averaging a line over a moving window reproduces the line.
        p = linear_path([3.0, 0.5])
        for k in (1, 2, 4):
            w = w_delta(p, DeltaParam(k, p.grid.h))
            expect = w.grid.times[:, None] * np.array([3.0, 0.5])[None, :]
            assert np.allclose(w.values, expect, atol=1e-14)

    def test_matches_quadrature_oracle(self):
        grid = TimeGrid(0.0, 1.0, 64)
        path = FbmSampler(grid, FbmParams(H=0.45, d=2, seed=22)).sample(1)
        dp = DeltaParam(5, grid.h)
        w = w_delta(path, dp)
        for node in (3, 17, 40, 59):
            want = smoothed_value(grid.times, path.values, grid.times[node], dp.delta)
            assert np.allclose(w.values[node], want, atol=1e-10)

    def test_domain_shrinks_by_window_width(self):
        grid = TimeGrid(0.0, 1.0, 32)
        path = FbmSampler(grid, FbmParams(H=0.4, d=1, seed=23)).sample(0)
        w = w_delta(path, DeltaParam(8, grid.h))
        assert w.grid.n_steps == 24
        assert w.grid.t_max == pytest.approx(0.75)

    def test_narrower_windows_track_the_path_closer(self):
        # RMS over nodes; the sup alone can plateau on a single rough seed.
        grid = TimeGrid(0.0, 1.0, 256)
        path = FbmSampler(grid, FbmParams(H=0.4, d=1, seed=24)).sample(2)
        errs = []
        for k in (32, 16, 8, 4, 2):
            w = w_delta(path, DeltaParam(k, grid.h))
            n = w.grid.n_steps
            diff = w.values[: n + 1] - path.values[: n + 1]
            errs.append(float(np.sqrt((diff**2).mean())))
        assert all(a > b for a, b in zip(errs, errs[1:]))


class TestSmoothedLift:
    def test_geometric_to_rounding(self):
        # The antisymmetric quadrature term folds into the prefix sums, so
        # the symmetric defect carries a few ulps rather than exact zeros.
        grid = TimeGrid(0.0, 1.0, 64)
        path = FbmSampler(grid, FbmParams(H=0.45, d=2, seed=25)).sample(0)
        rp = ww_delta(path, DeltaParam(4, grid.h))
        assert geometricity_residual(rp) < 1e-15

    def test_level1_is_smoothed_path(self):
        grid = TimeGrid(0.0, 1.0, 32)
        path = FbmSampler(grid, FbmParams(H=0.4, d=2, seed=26)).sample(1)
        dp = DeltaParam(2, grid.h)
        rp = ww_delta(path, dp)
        w = w_delta(path, dp)
        assert np.allclose(rp.values, w.values, atol=1e-14)

    def test_linear_case_closed_form(self):
        p = linear_path([2.0, 5.0])
        rp = ww_delta(p, DeltaParam(2, p.grid.h))
        n = rp.n_steps
        t = rp.grid.t_max
        assert np.allclose(rp.level1(0, n), np.array([2.0, 5.0]) * t, atol=1e-13)
        assert np.allclose(rp.level2(0, n), 0.5 * np.outer([2, 5], [2, 5]) * t**2, atol=1e-13)

    def test_second_level_converges_linearly_on_smooth_input(self):
        # W_delta(t) - omega(t) = (delta/2)(omega'(t) - omega'(0)) + O(delta^2)
        # for twice differentiable input, so first order is the true rate
        # here; only straight lines kill the leading term.
        n = 512
        base = smooth_path(n, extra=64)
        t = TimeGrid(0.0, 1.0, n).times
        from roughwz.lift import lift_smooth_quadrature

        deriv = np.column_stack([np.cos(base.grid.times), 2 * base.grid.times])
        truth = lift_smooth_quadrature(
            SamplePath(TimeGrid(0.0, 1.0, n), np.column_stack([np.sin(t), t**2])),
            derivative=deriv[: n + 1],
        ).level2(0, n)
        deltas, errs = [], []
        for k in (32, 16, 8, 4):
            rp = ww_delta(base, DeltaParam(k, base.grid.h))
            got = rp.level2(0, n)
            deltas.append(k * base.grid.h)
            errs.append(float(np.abs(got - truth).max()))
        assert 0.9 < fit_slope(deltas, errs) < 1.3

    def test_paired_ladder_shrinks_toward_true_lift(self):
        grid = TimeGrid(0.0, 1.0, 128).extended(16)
        path = FbmSampler(grid, FbmParams(H=0.45, d=2, seed=27)).sample(3)
        inner = path.restrict(0, 128)
        truth = lift_left_riemann(inner)
        sups = []
        for k in (16, 8, 4, 2, 1):
            rp = ww_delta(path, DeltaParam(k, grid.h)).restrict(0, 128)
            sups.append(float(np.abs(rp.values - truth.values).max()))
        assert all(a > b for a, b in zip(sups, sups[1:]))
