"""Functional tracking and empirical surrogates for the two constants the
analysis leaves unevaluated.

The record mirrors the a-priori estimates the boundedness argument runs on:
cell mass, enzyme L2 and H1 levels, sup norms, optional L^p masses of u, and
three running space-time accumulators (trapezoid in t between records)

    st_grad_v_sq = int_0^t int |grad v|^2,
    st_u_r       = int_0^t int u^r,
    st_lap_v_sq  = int_0^t int |Lap v|^2.

Each record also carries the instantaneous integrands (u_r, lap_v_sq; the
gradient integrand doubles as h1_v_seminorm_sq), so the accumulators can be
recomputed post hoc from a stored record sequence.

The two estimators:

* maximal_regularity_estimate drives v_t = Lap v - v + g from v = 0 for a
  synthetic forcing g and returns the weighted-norm ratio

      int e^(gamma s) (||v||_gamma^gamma + ||Lap v||_gamma^gamma) ds
      ----------------------------------------------------------------
      int e^(gamma s) ||g||_gamma^gamma ds

  a lower witness for the maximal-regularity constant at exponent gamma.
  estimate_c_reg takes the max over a frozen eight-member forcing family
  (constants, boundary-compatible cosine modes, time-modulated products).

* c_beta_estimate combines the ECM-data sup norms into the low-order
  constant used by the damping threshold.  Both are heuristic surrogates:
  the true constants are suprema this sampling cannot certify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._solvers import HelmholtzCG
from .grid import (
    Grid,
    ScalarField,
    gradient_sq,
    gradient_sup_norm,
    integrate,
    integrate_power,
    laplacian,
    laplacian_data,
    sup_norm,
)

__all__ = [
    "DiagnosticsRecord",
    "RegularityEstimate",
    "CRegEstimate",
    "Forcing",
    "snapshot",
    "apriori_violation",
    "maximal_regularity_estimate",
    "forcing_family",
    "estimate_c_reg",
    "c_beta_estimate",
    "c_beta_from_field",
    "write_diagnostics_csv",
    "read_diagnostics_csv",
]

CSV_COLUMNS = (
    "t",
    "mass_u",
    "l2_v_sq",
    "h1_v_sq",
    "linf_u",
    "w1inf_v",
    "st_grad_v_sq",
    "st_u_r",
    "st_lap_v_sq",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sampled set of solution functionals; see module docstring."""

    t: float
    mass_u: float
    l2_v_sq: float
    h1_v_seminorm_sq: float
    linf_u: float
    w1inf_v: float
    lp_u: dict
    st_grad_v_sq: float
    st_u_r: float
    st_lap_v_sq: float
    # instantaneous integrands backing the accumulators
    u_r: float
    lap_v_sq: float


def snapshot(
    state,
    params,
    p_list: Sequence[float] = (),
    prev: Optional[DiagnosticsRecord] = None,
) -> DiagnosticsRecord:
    """Sample the functionals of a state; chain ``prev`` to advance the
    space-time accumulators by the trapezoid rule between sample times."""
    u, v = state.u, state.v
    h1 = integrate(gradient_sq(v))
    u_r = integrate_power(u, params.r)
    lap_v = laplacian(v)
    lap_sq = integrate_power(lap_v, 2)
    if prev is None:
        st_grad = st_ur = st_lap = 0.0
    else:
        dt_rec = state.t - prev.t
        if dt_rec < 0.0:
            raise ValueError("snapshot times must be nondecreasing")
        st_grad = prev.st_grad_v_sq + 0.5 * dt_rec * (prev.h1_v_seminorm_sq + h1)
        st_ur = prev.st_u_r + 0.5 * dt_rec * (prev.u_r + u_r)
        st_lap = prev.st_lap_v_sq + 0.5 * dt_rec * (prev.lap_v_sq + lap_sq)
    return DiagnosticsRecord(
        t=state.t,
        mass_u=integrate(u),
        l2_v_sq=integrate_power(v, 2),
        h1_v_seminorm_sq=h1,
        linf_u=sup_norm(u),
        w1inf_v=sup_norm(v) + gradient_sup_norm(v),
        lp_u={float(p): integrate_power(u, float(p)) for p in p_list},
        st_grad_v_sq=st_grad,
        st_u_r=st_ur,
        st_lap_v_sq=st_lap,
        u_r=u_r,
        lap_v_sq=lap_sq,
    )


def apriori_violation(records: Sequence[DiagnosticsRecord], bound: float) -> list[float]:
    """Times where mass_u + l2_v_sq + h1_v_seminorm_sq exceeds the bound;
    an empty list certifies the boundedness functional stayed under it."""
    if len(records) == 0:
        raise ValueError("need at least one record")
    bound = float(bound)
    if not bound > 0.0:
        raise ValueError(f"bound must be positive, got {bound}")
    return [
        r.t
        for r in records
        if r.mass_u + r.l2_v_sq + r.h1_v_seminorm_sq > bound
    ]


# --- maximal-regularity estimator -------------------------------------------


@dataclass(frozen=True)
class RegularityEstimate:
    ratio: float
    degenerate: bool  # True only for identically-zero forcing


@dataclass(frozen=True)
class CRegEstimate:
    gamma: float
    ratios: tuple  # (name, ratio) per family member
    c_reg: float   # max ratio


@dataclass(frozen=True)
class Forcing:
    """Separable synthetic forcing g(x, t) = space(x) * modulation(t)."""

    name: str
    space: ScalarField
    modulation: Callable[[float], float] = field(compare=False)

    def at(self, t: float) -> np.ndarray:
        return self.space.data * self.modulation(t)


def forcing_family(grid: Grid) -> tuple[Forcing, ...]:
    """The frozen eight-member probe family for estimate_c_reg.

    Spatial profiles are constants and zero-flux cosine modes (products
    across axes where the dimension allows); modulations are constant or
    low-frequency oscillations, so every member is bounded and none is
    identically zero.
    """
    ones = ScalarField.full(grid, 1.0)
    xs = grid.meshgrid()

    def mode(ks: tuple[int, ...]) -> ScalarField:
        prof = np.ones(grid.node_shape)
        for axis, kk in enumerate(ks):
            if kk:
                prof = prof * np.cos(kk * np.pi * xs[axis] / grid.extent[axis])
        return ScalarField(grid, prof)

    if grid.dim >= 2:
        cross = mode((1, 1) + (0,) * (grid.dim - 2))
    else:
        cross = mode((3,))
    lifted = ScalarField(grid, 1.0 + 0.5 * mode((1,) + (0,) * (grid.dim - 1)).data)
    const = lambda t: 1.0
    return (
        Forcing("unit", ones, const),
        Forcing("unit-x2", ScalarField.full(grid, 2.0), const),
        Forcing("mode-1", mode((1,) + (0,) * (grid.dim - 1)), const),
        Forcing("mode-2", mode((2,) + (0,) * (grid.dim - 1)), const),
        Forcing("mode-cross", cross, const),
        Forcing("pulsed-unit", ones, math.sin),
        Forcing("mode-1-osc", mode((1,) + (0,) * (grid.dim - 1)), lambda t: math.sin(2.0 * t)),
        Forcing("lifted-mixed", lifted, lambda t: 1.0 + 0.5 * math.sin(3.0 * t)),
    )


def maximal_regularity_estimate(
    gamma: float,
    forcing: Forcing,
    grid: Grid,
    t_end: float,
    dt: float = 1e-3,
) -> RegularityEstimate:
    """March v_t = Lap v - v + forcing from v = 0 (backward Euler, source
    explicit) and return the exponentially weighted norm ratio described in
    the module docstring.  Identically-zero forcing returns ratio 0 with
    the degenerate flag set."""
    gamma = float(gamma)
    if not gamma > 1.0:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    t_end = float(t_end)
    if not t_end > 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if forcing.space.grid != grid:
        raise ValueError("forcing profile lives on a different grid")
    n_steps = max(1, int(round(t_end / float(dt))))
    dt = t_end / n_steps
    helm = HelmholtzCG(grid)

    def lp_gamma(data: np.ndarray) -> float:
        f = ScalarField(grid, np.abs(data), _checked=True)
        return integrate_power(f, gamma)

    v = np.zeros(grid.node_shape)
    num = 0.0
    den = 0.0
    # integrands at t = 0: v = 0 contributes nothing; g may not
    num_prev = 0.0
    den_prev = lp_gamma(forcing.at(0.0))
    for n in range(n_steps):
        t_n = n * dt
        t_next = t_n + dt
        rhs = v + dt * forcing.at(t_n)
        v, _ = helm.solve(rhs, dt, x0=v)
        weight = math.exp(gamma * t_next)
        num_next = weight * (lp_gamma(v) + lp_gamma(laplacian_data(grid, v)))
        den_next = weight * lp_gamma(forcing.at(t_next))
        num += 0.5 * dt * (num_prev + num_next)
        den += 0.5 * dt * (den_prev + den_next)
        num_prev, den_prev = num_next, den_next
    if den == 0.0:
        return RegularityEstimate(ratio=0.0, degenerate=True)
    return RegularityEstimate(ratio=num / den, degenerate=False)


def estimate_c_reg(
    gamma: float,
    grid: Grid,
    t_end: float = 4.0,
    dt: float = 1e-3,
) -> CRegEstimate:
    """Max of the regularity ratio over the frozen forcing family; the
    resulting c_reg feeds the damping threshold as its regularity input."""
    ratios = []
    best = 0.0
    for forcing in forcing_family(grid):
        est = maximal_regularity_estimate(gamma, forcing, grid, t_end, dt)
        ratios.append((forcing.name, est.ratio))
        best = max(best, est.ratio)
    return CRegEstimate(gamma=float(gamma), ratios=tuple(ratios), c_reg=best)


# --- ECM low-order constant --------------------------------------------------


def c_beta_estimate(
    xi: float,
    w0_sup: float,
    grad_w0_sup: float,
    lap_w0_sup: float,
    beta: float,
) -> float:
    """Combine the ECM-data sup norms into the low-order constant

        max{ xi*beta + m2, xi*w0_sup, m2 },
        m2 = max{ 2 xi grad_w0_sup, 2 lap_w0_sup },

    where beta is an a-priori sup-level of the cell density.  Heuristic
    surrogate: monotone nondecreasing in every argument.
    """
    xi = float(xi)
    if not xi > 0.0:
        raise ValueError(f"xi must be positive, got {xi}")
    for name, val in (
        ("w0_sup", w0_sup),
        ("grad_w0_sup", grad_w0_sup),
        ("lap_w0_sup", lap_w0_sup),
    ):
        if float(val) < 0.0:
            raise ValueError(f"{name} must be nonnegative, got {val}")
    beta = float(beta)
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    m2 = max(2.0 * xi * float(grad_w0_sup), 2.0 * float(lap_w0_sup))
    return max(xi * beta + m2, xi * float(w0_sup), m2)


def c_beta_from_field(xi: float, w0: ScalarField, beta: float) -> float:
    """c_beta_estimate with the sup norms measured from an ECM field."""
    return c_beta_estimate(
        xi,
        sup_norm(w0),
        gradient_sup_norm(w0),
        sup_norm(laplacian(w0)),
        beta,
    )


# --- CSV interface ------------------------------------------------------------


def _lp_columns(records: Sequence[DiagnosticsRecord]) -> tuple[float, ...]:
    ps = tuple(sorted(records[0].lp_u)) if records else ()
    for r in records:
        if tuple(sorted(r.lp_u)) != ps:
            raise ValueError("records carry inconsistent lp_u keys")
    return ps

def write_diagnostics_csv(path, records: Sequence[DiagnosticsRecord]) -> None:
    """Fixed column order, %.12e everywhere; one optional lp_u@p column per
    requested power."""
    if len(records) == 0:
        raise ValueError("need at least one record")
    ps = _lp_columns(records)
    header = ",".join(CSV_COLUMNS + tuple(f"lp_u@{p:g}" for p in ps))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for r in records:
            row = [
                r.t,
                r.mass_u,
                r.l2_v_sq,
                r.h1_v_seminorm_sq,
                r.linf_u,
                r.w1inf_v,
                r.st_grad_v_sq,
                r.st_u_r,
                r.st_lap_v_sq,
            ] + [r.lp_u[p] for p in ps]
            fh.write(",".join(f"{x:.12e}" for x in row) + "\n")


def read_diagnostics_csv(path) -> tuple[list[str], np.ndarray]:
    """Header names and a (rows, columns) float array."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.array(
            [[float(tok) for tok in line.split(",")] for line in fh if line.strip()]
        )
    return header, data
