"""Grid rough paths: level-2 enhancements of sampled paths.

A grid rough path stores, per grid interval, the level-1 increment and a
level-2 matrix; values over arbitrary node pairs are rebuilt with Chen's
relation

    X2_{s,t} = X2_{s,u} + X2_{u,t} + X1_{s,u} (x) X1_{u,t},

which the prefix-sum representation below evaluates in O(1) per pair.

Two constructions are provided.  The canonical lift of a sampled path uses
left-point Riemann sums for the upper-triangle entries at the path's own
resolution and completes diagonal and lower triangle by the geometric
conventions  X2^{ii} = (X1^i)^2 / 2  and  X2^{ji} = -X2^{ij} + X1^i X1^j,
so its symmetric part equals the square of the increment exactly.  The
quadrature lift of a continuously differentiable path keeps that exact
symmetric part and estimates the antisymmetric (area) part by trapezoid
quadrature of  int X_{s,r} (x) dX_r,  which is second-order in the mesh.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fbm import SamplePath, TimeGrid

__all__ = [
    "GridRoughPath",
    "Level2Value",
    "SigmaConcavityReport",
    "chen_combine",
    "geometricity_residual",
    "geometricity_defect_entrywise",
    "lift_left_riemann",
    "lift_smooth_quadrature",
    "reconstruct",
    "sigma_concavity_check",
]

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class Level2Value:
    """One level-2 block over [s, t]."""

    s: float
    t: float
    matrix: np.ndarray  # (d, d)


@dataclass(frozen=True)
class GridRoughPath:
    """Per-interval increments and level-2 blocks on a uniform grid."""

    grid: TimeGrid
    inc1: np.ndarray  # (n_steps, d)
    inc2: np.ndarray  # (n_steps, d, d)

    def __post_init__(self) -> None:
        inc1 = np.asarray(self.inc1, dtype=float)
        inc2 = np.asarray(self.inc2, dtype=float)
        n = self.grid.n_steps
        if inc1.ndim != 2 or inc1.shape[0] != n:
            raise ValueError(f"inc1 must have shape ({n}, d), got {inc1.shape}")
        d = inc1.shape[1]
        if inc2.shape != (n, d, d):
            raise ValueError(f"inc2 must have shape ({n}, {d}, {d}), got {inc2.shape}")
        object.__setattr__(self, "inc1", inc1)
        object.__setattr__(self, "inc2", inc2)

    @property
    def d(self) -> int:
        return self.inc1.shape[1]

    @property
    def n_steps(self) -> int:
        return self.grid.n_steps

    # -- prefix representation -------------------------------------------

    @cached_property
    def values(self) -> np.ndarray:
        """Level-1 partial sums from the first node, shape (n_nodes, d)."""
        out = np.zeros((self.grid.n_nodes, self.d))
        np.cumsum(self.inc1, axis=0, out=out[1:])
        out.setflags(write=False)
        return out

    @cached_property
    def _area_prefix(self) -> np.ndarray:
        """A[k] = X2 over [node 0, node k], shape (n_nodes, d, d)."""
        # Chen fold left to right: A[k+1] = A[k] + inc2[k] + X1_{0,k} (x) inc1[k].
        cross = self.values[:-1, :, None] * self.inc1[:, None, :]
        out = np.zeros((self.grid.n_nodes, self.d, self.d))
        np.cumsum(self.inc2 + cross, axis=0, out=out[1:])
        out.setflags(write=False)
        return out

    def level1(self, i: int, j: int) -> np.ndarray:
        return self.values[j] - self.values[i]

    def level2(self, i: int, j: int) -> np.ndarray:
        """X2 over node pair (i, j), i <= j, by Chen's relation."""
        a = self._area_prefix
        v = self.values
        return a[j] - a[i] - np.outer(v[i], v[j] - v[i])

    def level2_block(self, i_lo: int, j: int) -> np.ndarray:
        """X2 over (i, j) for every i in [i_lo, j), shape (j - i_lo, d, d)."""
        a = self._area_prefix
        v = self.values
        left = v[i_lo:j]
        return a[j] - a[i_lo:j] - left[:, :, None] * (v[j] - left)[:, None, :]

    def level2_by_gap(self, gap: int) -> np.ndarray:
        """X2 over (i, i + gap) for every start i, shape (n_nodes - gap, d, d)."""
        a = self._area_prefix
        v = self.values
        left = v[:-gap]
        inc = v[gap:] - left
        return a[gap:] - a[:-gap] - left[:, :, None] * inc[:, None, :]

    # -- derived grids -----------------------------------------------------

    def restrict(self, i_lo: int, i_hi: int) -> "GridRoughPath":
        """Window onto node indices [i_lo, i_hi]; per-interval data is shared."""
        return GridRoughPath(
            self.grid.window(i_lo, i_hi),
            self.inc1[i_lo:i_hi],
            self.inc2[i_lo:i_hi],
        )

    def coarsen(self, stride: int) -> "GridRoughPath":
        """Chen-exact restriction to every stride-th node."""
        n = self.n_steps
        if stride < 1 or n % stride != 0:
            raise ValueError(f"stride {stride} does not divide {n} steps")
        if stride == 1:
            return self
        nodes = np.arange(0, n + 1, stride)
        v = self.values[nodes]
        a = self._area_prefix[nodes]
        inc1 = np.diff(v, axis=0)
        inc2 = a[1:] - a[:-1] - v[:-1, :, None] * inc1[:, None, :]
        g = self.grid
        coarse = TimeGrid(g.t_min, g.t_max, n // stride)
        return GridRoughPath(coarse, inc1, inc2)


# ---------------------------------------------------------------------------
# Chen algebra
# ---------------------------------------------------------------------------


def chen_combine(
    a: Level2Value, b: Level2Value, x_su: np.ndarray, x_ut: np.ndarray
) -> Level2Value:
    """Combine blocks over [s, u] and [u, t] into the block over [s, t]."""
    if abs(a.t - b.s) > _TIME_TOL * max(1.0, abs(a.t)):
        raise ValueError(f"blocks do not abut: [{a.s}, {a.t}] then [{b.s}, {b.t}]")
    return Level2Value(a.s, b.t, a.matrix + b.matrix + np.outer(x_su, x_ut))


def reconstruct(rp: GridRoughPath, s: float, t: float) -> tuple[np.ndarray, Level2Value]:
    """Level-1 increment and level-2 block over the node pair (s, t)."""
    i = rp.grid.index_of(s)
    j = rp.grid.index_of(t)
    if j < i:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    return rp.level1(i, j), Level2Value(s, t, rp.level2(i, j))


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------


def _geometric_completion(inc1: np.ndarray, area: np.ndarray | None = None) -> np.ndarray:
    """Per-interval level-2 data with exact symmetric part inc (x) inc / 2."""
    sym = 0.5 * inc1[:, :, None] * inc1[:, None, :]
    return sym if area is None else sym + area


def lift_left_riemann(path: SamplePath) -> GridRoughPath:
    """Canonical lift of a sampled path at its own resolution.

    Reconstruction over any node pair yields left-point Riemann sums over
    the finest sub-grid in the upper triangle, (X1^i)^2 / 2 on the diagonal
    and -X2^{ij} + X1^i X1^j in the lower triangle, all exactly: per
    interval the upper triangle is zero (a single left-point term vanishes)
    and diagonal plus lower triangle carry the geometric completion.
    """
    inc1 = np.diff(path.values, axis=0)
    outer = inc1[:, :, None] * inc1[:, None, :]
    inc2 = np.tril(outer, -1) + 0.5 * (
        np.eye(path.d, dtype=bool) * outer
    )
    return GridRoughPath(path.grid, inc1, inc2)


def lift_smooth_quadrature(path: SamplePath, derivative: np.ndarray | None = None) -> GridRoughPath:
    """Lift of a C^1 path from derivative samples at the nodes.

    The symmetric part of each per-interval block is the exact geometric
    identity inc (x) inc / 2; the antisymmetric part is the trapezoid rule
    for int_{t_k}^{t_{k+1}} X_{t_k, r} (x) dX_r, whose integrand vanishes
    at the left endpoint.  Exact for linear paths, second order in the mesh
    for smooth ones.  Without derivative samples, central differences of
    the values are used (one-sided at the ends).
    """
    v = path.values
    h = path.grid.h
    if derivative is None:
        derivative = np.gradient(v, h, axis=0)
    else:
        derivative = np.asarray(derivative, dtype=float)
        if derivative.ndim == 1:
            derivative = derivative[:, None]
        if derivative.shape != v.shape:
            raise ValueError(
                f"derivative shape {derivative.shape} does not match values {v.shape}"
            )
    inc1 = np.diff(v, axis=0)
    trap = 0.5 * h * (inc1[:, :, None] * derivative[1:, None, :])
    area = 0.5 * (trap - np.swapaxes(trap, 1, 2))
    return GridRoughPath(path.grid, inc1, _geometric_completion(inc1, area))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def _defect_prefix(rp: GridRoughPath) -> np.ndarray:
    """Prefix sums of the per-interval symmetric defects (they add over pairs)."""
    sym = 0.5 * (rp.inc2 + np.swapaxes(rp.inc2, 1, 2))
    defect = sym - 0.5 * rp.inc1[:, :, None] * rp.inc1[:, None, :]
    out = np.zeros((rp.grid.n_nodes, rp.d, rp.d))
    np.cumsum(defect, axis=0, out=out[1:])
    return out


def geometricity_defect_entrywise(rp: GridRoughPath) -> np.ndarray:
    """Per entry: max over node pairs of |Sym(X2)_{s,t} - (X1 (x) X1)_{s,t} / 2|."""
    p = _defect_prefix(rp)
    return p.max(axis=0) - p.min(axis=0)


def geometricity_residual(rp: GridRoughPath) -> float:
    """Largest entry of the symmetric defect over all node pairs."""
    return float(geometricity_defect_entrywise(rp).max())


@dataclass(frozen=True)
class SigmaConcavityReport:
    """Empirical increment variances on a lag set, with shape diagnostics.

    Estimates sigma^2(u) = E |x_{t+u} - x_t|^2 per component, pooled over
    all valid grid positions t, with the path ensemble supplying the
    averaging.  Violations are lag indices where monotonicity (sigma^2
    non-decreasing) or concavity (difference quotients non-increasing)
    fails by more than `tolerance_sd` standard errors.  Diagnostic only; no
    pass or fail is implied.
    """

    lags: np.ndarray
    sigma2: np.ndarray
    stderr: np.ndarray
    n_paths: int
    monotonicity_violations: tuple[int, ...]
    concavity_violations: tuple[int, ...]
    tolerance_sd: float


def sigma_concavity_check(
    values: np.ndarray,
    grid: TimeGrid,
    lag_multiples: "list[int] | np.ndarray",
    tolerance_sd: float = 4.0,
) -> SigmaConcavityReport:
    """Increment-variance shape diagnostic for an ensemble on one grid.

    values has shape (n_paths, n_nodes, d) with n_paths >= 1000 so the
    standard errors are meaningful; components are pooled.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 3 or values.shape[1] != grid.n_nodes:
        raise ValueError(f"expected (n_paths, {grid.n_nodes}, d) ensemble, got {values.shape}")
    n_paths = values.shape[0]
    if n_paths < 1000:
        raise ValueError(f"need at least 1000 paths for stable variance estimates, got {n_paths}")
    lag_multiples = np.asarray(lag_multiples, dtype=int)
    if np.any(lag_multiples < 1) or np.any(lag_multiples > grid.n_steps):
        raise ValueError(f"lag multiples must lie in [1, {grid.n_steps}]")

    sigma2 = np.empty(len(lag_multiples))
    stderr = np.empty(len(lag_multiples))
    for idx, k in enumerate(lag_multiples):
        sq = (values[:, k:, :] - values[:, :-k, :]) ** 2
        per_path = sq.mean(axis=(1, 2))  # pooled over positions and components
        sigma2[idx] = per_path.mean()
        stderr[idx] = per_path.std(ddof=1) / np.sqrt(n_paths)

    lags = lag_multiples * grid.h
    mono = tuple(
        int(i + 1)
        for i in range(len(lags) - 1)
        if sigma2[i + 1] < sigma2[i] - tolerance_sd * (stderr[i] + stderr[i + 1])
    )
    slopes = np.diff(sigma2) / np.diff(lags)
    slope_err = (stderr[:-1] + stderr[1:]) / np.diff(lags)
    concave = tuple(
        int(i + 1)
        for i in range(len(slopes) - 1)
        if slopes[i + 1] > slopes[i] + tolerance_sd * (slope_err[i] + slope_err[i + 1])
    )
    return SigmaConcavityReport(
        lags=lags,
        sigma2=sigma2,
        stderr=stderr,
        n_paths=n_paths,
        monotonicity_violations=mono,
        concavity_violations=concave,
        tolerance_sd=tolerance_sd,
    )
