"""Rough differential equations driven by grid rough paths.

Solves  dy = (A y + f(y)) dt + g(y) dX  with the explicit one-step scheme

    y_v = y_u + (A y_u + f(y_u)) (v - u) + g(y_u) X1_{u,v}
        + Dg(y_u)[g(y_u)] X2_{u,v},

whose driver terms are the degree-2 local expansion of the rough integral;
the scheme restarts exactly at grid nodes, which is what makes discrete
cocycle checks exact.  Solutions are controlled paths with Gubinelli
derivative g(y); their remainder is  R^y_{s,t} = y_{s,t} - g(y_s) X1_{s,t}
(the drift sits inside the remainder).

Index conventions, pinned by the scalar chain-rule test dy = y dX: the
level-2 block is  X2^{b,c} = int X1^b dX1^c, and the second-order term
contracts as

    ( Dg(y) g(y) X2 )^a = sum_{b,c,e}  d_e g^{a,c}(y)  g^{e,b}(y)  X2^{b,c}.

Integrands of rough integrals are controlled paths whose value array
carries a trailing driver axis; compensated sums contract that axis with
X1 and the last two Gubinelli axes (value-component axis c, then direction
axis b) with X2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fbm import TimeGrid
from .lift import GridRoughPath
from .norms import (
    _dp_max_partition,
    _resolve_window,
    greedy_stopping_times,
    homogeneous_pvar_norm,
    pvar_level2_distance,
    pvar_seminorm,
)

__all__ = [
    "AprioriBoundReport",
    "ControlledPath",
    "IntegralDistanceReport",
    "SolutionDistance",
    "SolverBlowUpError",
    "VECTOR_FIELD_CATALOG",
    "VectorField",
    "apriori_bound_check",
    "builtin_vector_field",
    "controlled_integrand",
    "integral_distance_bound",
    "remainder_norm",
    "rough_integral",
    "solution_distance",
    "solve_rde",
]


class SolverBlowUpError(RuntimeError):
    """The explicit scheme produced a non-finite state."""

    def __init__(self, node_index: int, time: float):
        self.node_index = node_index
        self.time = time
        super().__init__(
            f"solution became non-finite at node {node_index} (t = {time}); "
            "reduce the step, the field size or the window"
        )


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    """Coefficients of dy = (A y + f(y)) dt + g(y) dX with declared constants.

    f must be globally Lipschitz with constant c_f; g maps R^m to R^{m x d}
    with derivative tensor dg(y)[a, b, e] = d g^{a,b} / d y^e and bound
    c_g >= max of the sup norms of g and its first three derivatives
    (math.nan when unbounded; such fields only feed the solver, not the
    bound evaluators).
    """

    m: int
    d: int
    a_mat: np.ndarray
    f: Callable[[np.ndarray], np.ndarray]
    c_f: float
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    c_g: float
    name: str = "custom"

    def __post_init__(self) -> None:
        a = np.asarray(self.a_mat, dtype=float)
        if a.shape != (self.m, self.m):
            raise ValueError(f"A must be ({self.m}, {self.m}), got {a.shape}")
        object.__setattr__(self, "a_mat", a)

    @property
    def L(self) -> float:
        """Drift growth constant ||A|| + c_f."""
        return float(np.linalg.norm(self.a_mat, 2)) + self.c_f

    def drift(self, y: np.ndarray) -> np.ndarray:
        return self.a_mat @ y + self.f(y)

    def check_gubinelli_derivative(self, points: np.ndarray, step: float = 1e-6) -> float:
        """Max relative error of dg against central differences of g."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        worst = 0.0
        for y in points:
            ana = self.dg(y)
            scale = max(1.0, float(np.abs(ana).max()))
            for e in range(self.m):
                bump = np.zeros(self.m)
                bump[e] = step
                num = (self.g(y + bump) - self.g(y - bump)) / (2.0 * step)
                worst = max(worst, float(np.abs(ana[:, :, e] - num).max()) / scale)
        return worst


def _sin_g_field(m: int, d: int, amp: float, drift: float) -> VectorField:
    phase = 2.0 * math.pi * np.arange(m * d).reshape(m, d) / (m * d + 1)
    rows = np.arange(m)

    def g(y: np.ndarray) -> np.ndarray:
        return amp * np.sin(y[:, None] + phase)

    def dg(y: np.ndarray) -> np.ndarray:
        out = np.zeros((m, d, m))
        out[rows, :, rows] = amp * np.cos(y[:, None] + phase)
        return out

    def f(y: np.ndarray) -> np.ndarray:
        return drift * np.cos(y)

    # Entrywise bounds give ||g||, ||Dg||, ||D2g||, ||D3g|| <= amp sqrt(m d).
    return VectorField(
        m=m,
        d=d,
        a_mat=np.zeros((m, m)),
        f=f,
        c_f=drift,
        g=g,
        dg=dg,
        c_g=amp * math.sqrt(m * d),
        name="sin-g",
    )


def _additive_field(m: int, d: int, sigma: np.ndarray | None) -> VectorField:
    sig = np.eye(m, d) if sigma is None else np.asarray(sigma, dtype=float)
    if sig.shape != (m, d):
        raise ValueError(f"sigma must be ({m}, {d}), got {sig.shape}")

    return VectorField(
        m=m,
        d=d,
        a_mat=np.zeros((m, m)),
        f=lambda y: np.zeros(m),
        c_f=0.0,
        g=lambda y: sig,
        dg=lambda y: np.zeros((m, d, m)),
        c_g=float(np.linalg.norm(sig)),
        name="additive",
    )


def _drift_only_field(m: int, d: int, rate: float) -> VectorField:
    return VectorField(
        m=m,
        d=d,
        a_mat=np.zeros((m, m)),
        f=lambda y: -rate * y,
        c_f=abs(rate),
        g=lambda y: np.zeros((m, d)),
        dg=lambda y: np.zeros((m, d, m)),
        c_g=0.0,
        name="drift-only",
    )


def _linear_g_field(m: int, d: int, scale: float) -> VectorField:
    if m != d:
        raise ValueError(f"linear-g needs m == d, got m={m}, d={d}")
    eye = np.eye(m, dtype=bool)

    def g(y: np.ndarray) -> np.ndarray:
        return scale * np.diag(y)

    def dg(y: np.ndarray) -> np.ndarray:
        out = np.zeros((m, d, m))
        out[eye[:, :, None] & eye[:, None, :]] = scale
        return out

    return VectorField(
        m=m,
        d=d,
        a_mat=np.zeros((m, m)),
        f=lambda y: np.zeros(m),
        c_f=0.0,
        g=g,
        dg=dg,
        c_g=math.nan,  # unbounded; oracle use only
        name="linear-g",
    )


VECTOR_FIELD_CATALOG = ("additive", "drift-only", "linear-g", "sin-g")


def builtin_vector_field(name: str, m: int = 2, d: int = 2, **params) -> VectorField:
    """Named coefficient sets used by tests and the experiment CLI.

    additive:   g constant (default eye), no drift; solutions are y0 + g X1.
    drift-only: g = 0, f(y) = -rate y (rate=1); solutions ignore the driver.
    linear-g:   g(y) = scale diag(y) (scale=1, m == d); unbounded, for the
                exponential chain-rule oracle.
    sin-g:      g^{ab}(y) = amp sin(y^a + phase_ab) (amp=0.25) with drift
                f(y) = drift cos(y) (drift=0.25); bounded with explicit c_g.
    """
    if name == "sin-g":
        return _sin_g_field(m, d, params.pop("amp", 0.25), params.pop("drift", 0.25))
    if name == "additive":
        return _additive_field(m, d, params.pop("sigma", None))
    if name == "drift-only":
        return _drift_only_field(m, d, params.pop("rate", 1.0))
    if name == "linear-g":
        return _linear_g_field(m, d, params.pop("scale", 1.0))
    raise ValueError(f"unknown vector field {name!r}; catalog: {VECTOR_FIELD_CATALOG}")


# ---------------------------------------------------------------------------
# controlled paths and rough integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlledPath:
    """Node values with a Gubinelli derivative against a declared driver.

    values has shape (n_nodes, *value_shape); gubinelli appends one driver
    axis, shape (n_nodes, *value_shape, d).  Solutions store value_shape
    (m,); integrands of rough integrals store (m, d), the trailing axis
    being the one contracted with the driver.
    """

    grid: TimeGrid
    values: np.ndarray
    gubinelli: np.ndarray
    driver: GridRoughPath | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        gub = np.asarray(self.gubinelli, dtype=float)
        if v.shape[0] != self.grid.n_nodes:
            raise ValueError(f"values rows {v.shape[0]} != grid nodes {self.grid.n_nodes}")
        if gub.shape[:-1] != v.shape:
            raise ValueError(
                f"gubinelli shape {gub.shape} must be values shape {v.shape} plus a driver axis"
            )
        if self.driver is not None:
            if gub.shape[-1] != self.driver.d:
                raise ValueError(
                    f"gubinelli driver axis {gub.shape[-1]} != driver dimension {self.driver.d}"
                )
            if not self.grid.is_compatible(self.driver.grid):
                raise ValueError("controlled path and driver live on different grids")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "gubinelli", gub)

    def remainder_block(self, i_lo: int, j: int) -> np.ndarray:
        """R_{i,j} = y_{i,j} - y'_i X1_{i,j} for all i in [i_lo, j)."""
        if self.driver is None:
            raise ValueError("remainders need a declared driver")
        w1 = self.driver.values[j] - self.driver.values[i_lo:j]
        lin = np.einsum("i...d,id->i...", self.gubinelli[i_lo:j], w1)
        return self.values[j] - self.values[i_lo:j] - lin


def controlled_integrand(vf: VectorField, cp: ControlledPath) -> ControlledPath:
    """The integrand g(y) of the rough integral as a controlled path.

    Values are g(y_t), shape (n, m, d); the Gubinelli derivative composes
    the chain rule with y' = g(y):  G'[a, c, b] = sum_e d_e g^{a,c} g^{e,b}.
    """
    n = cp.grid.n_nodes
    vals = np.empty((n, vf.m, vf.d))
    gub = np.empty((n, vf.m, vf.d, vf.d))
    for i in range(n):
        y = cp.values[i]
        gy = vf.g(y)
        vals[i] = gy
        gub[i] = np.einsum("ace,eb->acb", vf.dg(y), gy)
    return ControlledPath(cp.grid, vals, gub, driver=cp.driver)


def rough_integral(
    cp: ControlledPath, rp: GridRoughPath, s: float | None = None, t: float | None = None
) -> np.ndarray:
    """Compensated-sum rough integral of a controlled integrand over [s, t].

    Sum over grid intervals [u, v] of  y_u X1_{u,v} + y'_u X2_{u,v}  with
    the contractions described in the module docstring.  s, t default to
    the window ends.
    """
    if not cp.grid.is_compatible(rp.grid):
        raise ValueError("integrand and driver live on different grids")
    if cp.values.shape[-1] != rp.d:
        raise ValueError(
            f"integrand value axis {cp.values.shape[-1]} does not match driver dimension {rp.d}"
        )
    i = 0 if s is None else rp.grid.index_of(s)
    j = rp.grid.n_steps if t is None else rp.grid.index_of(t)
    if j < i:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    term1 = np.einsum("u...c,uc->...", cp.values[i:j], rp.inc1[i:j])
    term2 = np.einsum("u...cb,ubc->...", cp.gubinelli[i:j], rp.inc2[i:j])
    return term1 + term2


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------


def solve_rde(vf: VectorField, rp: GridRoughPath, y0: np.ndarray) -> ControlledPath:
    """Explicit one-step solution over the driver's whole window."""
    if vf.d != rp.d:
        raise ValueError(f"field expects d={vf.d} driver components, driver has {rp.d}")
    y0 = np.asarray(y0, dtype=float).reshape(vf.m)
    n = rp.n_steps
    h = rp.grid.h
    values = np.empty((n + 1, vf.m))
    gub = np.empty((n + 1, vf.m, vf.d))
    y = y0
    values[0] = y
    inc1 = rp.inc1
    inc2 = rp.inc2
    # Escaping iterates surface as SolverBlowUpError, not as numpy warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        for u in range(n):
            gy = vf.g(y)
            gub[u] = gy
            gw = gy @ inc2[u]  # gw[e, c] = sum_b g^{e,b} X2^{b,c}
            y = (
                y
                + vf.drift(y) * h
                + gy @ inc1[u]
                + np.einsum("ace,ec->a", vf.dg(y), gw)
            )
            if not np.all(np.isfinite(y)):
                raise SolverBlowUpError(u + 1, float(rp.grid.times[u + 1]))
            values[u + 1] = y
    gub[n] = vf.g(y)
    return ControlledPath(rp.grid, values, gub, driver=rp)


# ---------------------------------------------------------------------------
# norms of solutions and bound evaluators
# ---------------------------------------------------------------------------


def _row_norms(blocks: np.ndarray) -> np.ndarray:
    """Euclidean norm of each row, flattening any trailing axes."""
    flat = blocks.reshape(blocks.shape[0], -1)
    return np.sqrt(np.einsum("ij,ij->i", flat, flat))


def remainder_norm(
    cp: ControlledPath,
    rp: GridRoughPath,
    q: float,
    i_lo: int = 0,
    i_hi: int | None = None,
) -> float:
    """Exact q-variation of the remainder blocks y_{s,t} - y'_s X1_{s,t}."""
    if q < 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    i_lo, i_hi = _resolve_window(rp.grid.n_steps, i_lo, i_hi)
    # Rebind to the given driver; the constructor checks grid compatibility.
    ref = ControlledPath(cp.grid, cp.values, cp.gubinelli, driver=rp)

    def col(j: int) -> np.ndarray:
        r = ref.remainder_block(i_lo, j)
        return _row_norms(r) ** q

    return _dp_max_partition(col, i_lo, i_hi) ** (1.0 / q)


@dataclass(frozen=True)
class SolutionDistance:
    """Three-part distance between two solutions on one grid."""

    sup: float
    pvar: float
    remainder_qvar: float


def solution_distance(a: ControlledPath, b: ControlledPath, p: float) -> SolutionDistance:
    """Sup distance, p-variation distance and q-variation of R^a - R^b.

    The remainders are taken against each path's own declared driver, so
    the third part also sees the difference of the drivers.
    """
    if a.driver is None or b.driver is None:
        raise ValueError("both controlled paths must declare their drivers")
    if not a.grid.is_compatible(b.grid):
        raise ValueError("controlled paths live on different grids")
    diff = a.values - b.values
    sup = float(np.sqrt(np.einsum("id,id->i", diff, diff)).max())
    pv = pvar_seminorm(diff, p)
    q = p / 2.0
    n = a.grid.n_steps

    def col(j: int) -> np.ndarray:
        r = a.remainder_block(0, j) - b.remainder_block(0, j)
        return _row_norms(r) ** q

    rem = _dp_max_partition(col, 0, n) ** (1.0 / q)
    return SolutionDistance(sup=sup, pvar=pv, remainder_qvar=rem)


@dataclass(frozen=True)
class AprioriBoundReport:
    """Both a-priori estimates against the realised solution norms.

    bound_sup majorises ||y||_inf; bound_var majorises
    ||y_start|| + |||y|||_{p-var} + |||R^y|||_{q-var}.  Ratios are
    bound / actual, so a ratio below 1 flags a falsification candidate.
    """

    bound_sup: float
    actual_sup: float
    bound_var: float
    actual_var: float
    n_intervals: int
    eta: float
    c_p: float
    L: float
    T: float

    @property
    def ratio_sup(self) -> float:
        return self.bound_sup / self.actual_sup if self.actual_sup > 0 else math.inf

    @property
    def ratio_var(self) -> float:
        return self.bound_var / self.actual_var if self.actual_var > 0 else math.inf

    @property
    def falsified(self) -> bool:
        return self.ratio_sup < 1.0 or self.ratio_var < 1.0


def apriori_bound_check(
    vf: VectorField,
    cp: ControlledPath,
    p: float,
    c_p: float = 1.0,
    eta: float | None = None,
) -> AprioriBoundReport:
    """Evaluate the exponential a-priori bounds for a solved trajectory.

    The interval count N uses the greedy stopping times of the declared
    driver at level eta, defaulting to the proof's choice 1/(4 c_p c_g).
    c_p is the unknown sewing constant, surfaced as configuration.
    """
    if cp.driver is None:
        raise ValueError("controlled path must declare its driver")
    if c_p < 1.0:
        raise ValueError(f"c_p must be >= 1, got {c_p}")
    if eta is None:
        if not math.isfinite(vf.c_g) or vf.c_g <= 0.0:
            raise ValueError("field has no usable c_g; pass eta explicitly")
        eta = 1.0 / (4.0 * c_p * vf.c_g)
    rp = cp.driver
    n_int = greedy_stopping_times(rp, eta, p).count
    g = cp.grid
    big_t = g.t_max - g.t_min
    L = vf.L
    f0 = float(np.linalg.norm(vf.f(np.zeros(vf.m))))
    if L > 0.0:
        drift_term = f0 / L
    else:
        drift_term = 0.0 if f0 == 0.0 else math.inf
    y_start = float(np.linalg.norm(cp.values[0]))
    bracket = y_start + (drift_term + 1.0 / c_p) * n_int
    grow = math.exp(4.0 * L * big_t)
    bound_sup = bracket * grow
    bound_var = bracket * grow * n_int ** ((p - 1.0) / p)
    actual_sup = float(np.sqrt(np.einsum("id,id->i", cp.values, cp.values)).max())
    actual_var = (
        y_start + pvar_seminorm(cp.values, p) + remainder_norm(cp, rp, p / 2.0)
    )
    return AprioriBoundReport(
        bound_sup=bound_sup,
        actual_sup=actual_sup,
        bound_var=bound_var,
        actual_var=actual_var,
        n_intervals=n_int,
        eta=eta,
        c_p=c_p,
        L=L,
        T=big_t,
    )


@dataclass(frozen=True)
class IntegralDistanceReport:
    """Explicit integral-distance bound against the measured distance."""

    lhs: float
    rhs: float
    term_pair: float
    term_level1: float
    term_level2: float

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.rhs


def integral_distance_bound(
    vf: VectorField,
    cp_true: ControlledPath,
    cp_delta: ControlledPath,
    p: float,
    c_p: float = 1.0,
    s: float | None = None,
    t: float | None = None,
) -> IntegralDistanceReport:
    """Distance of the two rough integrals of g(y) against its explicit bound.

    The left side is || int g(y) dX - int g(y^delta) dX^delta || over the
    window, both by compensated sums against each solution's own driver.
    The right side is the explicit three-term estimate: a product term in
    the solution distances, a level-1 driver distance term and a level-2
    driver distance term, with the sewing constant c_p supplied by the
    caller.
    """
    if cp_true.driver is None or cp_delta.driver is None:
        raise ValueError("both controlled paths must declare their drivers")
    if not math.isfinite(vf.c_g):
        raise ValueError("bound evaluation needs a finite c_g")
    rp = cp_true.driver
    rp_d = cp_delta.driver
    grid = cp_true.grid
    i = 0 if s is None else grid.index_of(s)
    j = grid.n_steps if t is None else grid.index_of(t)
    if j <= i:
        raise ValueError(f"need s < t, got s={s}, t={t}")
    q = p / 2.0
    sl = slice(i, j + 1)

    z_true = rough_integral(controlled_integrand(vf, cp_true), rp, grid.times[i], grid.times[j])
    z_delta = rough_integral(
        controlled_integrand(vf, cp_delta), rp_d, grid.times[i], grid.times[j]
    )
    lhs = float(np.linalg.norm(z_true - z_delta))

    omega_hom = homogeneous_pvar_norm(rp, p, i, j)
    y_pv = pvar_seminorm(cp_true.values[sl], p)
    yd_pv = pvar_seminorm(cp_delta.values[sl], p)
    ry_q = remainder_norm(cp_true, rp, q, i, j)
    ryd_q = remainder_norm(cp_delta, rp_d, q, i, j)
    diff = cp_true.values - cp_delta.values
    d_sup = float(np.sqrt(np.einsum("id,id->i", diff[sl], diff[sl])).max())
    d_pv = pvar_seminorm(diff[sl], p)

    def col(jj: int) -> np.ndarray:
        r = cp_true.remainder_block(i, jj) - cp_delta.remainder_block(i, jj)
        return _row_norms(r) ** q

    d_rem = _dp_max_partition(col, i, j) ** (1.0 / q)

    cg = vf.c_g
    term_pair = (
        15.0
        * c_p
        * max(cg**2 * omega_hom**2, cg * omega_hom)
        * (yd_pv + y_pv + ry_q + 1.0)
        * (d_pv + d_sup + d_rem)
    )
    w1_pv = pvar_seminorm(rp.values[sl], p)
    wd_pv = pvar_seminorm(rp_d.values[sl], p)
    lvl1_dist = pvar_seminorm(rp.values[sl] - rp_d.values[sl], p)
    term_level1 = (yd_pv * (wd_pv + w1_pv) + ryd_q + 1.0) * max(cg**2, cg) * lvl1_dist
    lvl2_dist = pvar_level2_distance(rp, rp_d, q, i, j)
    term_level2 = 2.0 * cg**2 * c_p * (yd_pv + 1.0) * lvl2_dist

    return IntegralDistanceReport(
        lhs=lhs,
        rhs=term_pair + term_level1 + term_level2,
        term_pair=term_pair,
        term_level1=term_level1,
        term_level2=term_level2,
    )
