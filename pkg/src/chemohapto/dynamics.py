"""Time integration of the invasion system

    u_t = Lap u - chi div(u grad v) - xi div(u grad w) + u (a - mu u^(r-1) - w)
    v_t = Lap v - v + u
    w_t = -v w

on a node-centered Neumann grid, with positivity preserved by construction
rather than by limiting.

One step splits the system as v, then w, then u, with u seeing the fresh
v and w:

(1) v:  backward Euler in (Lap - 1), source explicit,
        ((1+dt) I - dt Lap) v' = v + dt u,   solved by CG to 1e-10 residual.
(2)     v_accum += dt (v + v')/2   (trapezoid of the exposure integral).
(3) w:  exact integrating factor on the frozen exposure increment,
        w' = w exp(-dt (v + v')/2).  Nonnegative and nonincreasing exactly.
(4) u:  explicit upwind taxis transport against v', w'; then backward-Euler
        diffusion through an exact cosine-transform solve (the transform
        pins the mean mode, so diffusion conserves cell mass to roundoff);
        then the local reaction ratio

            u' = q (1 + dt a_+) / (1 + dt (a_- + mu q^(r-1) + w'))

        with q the post-diffusion value.  Every factor is nonnegative, so
        u' >= 0 whenever q >= 0, and a spatially uniform logistic steady
        state q = (a/mu)^(1/(r-1)) with w = 0 is an exact fixed point of
        the ratio (numerator and denominator balance identically).

Clamping policy: u and w are nonnegative by construction up to roundoff,
so magnitudes below 1e-14 (relative to the field scale) are flushed to
zero and anything more negative is a step failure, triggering the dt/2
retry.  The CG iterate for v carries solver noise up to its residual
tolerance, so its clamp window is 1e-12 on the same relative scale; deeper
negativity again fails the step.  After any accepted step min u, min v,
min w >= 0 holds exactly.

Step size control: dt = cfl_safety * min over axes of
h^2 / (2 dim + h max|velocity|), velocities being the taxis face speeds
|chi d_a v + xi d_a w|, never above dt_init; a failing step is retried at
dt/2 up to 20 times before the run reports StepSizeUnderflow.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import diagnostics
from ._solvers import HelmholtzCG, SolverError, SpectralDiffusion
from .grid import (
    Grid,
    ScalarField,
    advective_divergence,
    gradient_sup_norm,
    read_field,
    sup_norm,
    write_field,
)

__all__ = [
    "SimParams",
    "SimState",
    "RunStatus",
    "RunOutcome",
    "InitialDataError",
    "StepFailure",
    "SolverError",
    "validate_initial_data",
    "initial_state",
    "cfl_dt",
    "step",
    "blow_up_check",
    "run",
    "run_from_state",
    "write_checkpoint",
    "read_checkpoint",
]

V_SOLVE_TOL = 1e-10
MAX_RETRIES = 20
# clamp-to-zero windows, relative to max(1, field scale); see module docstring
_NEG_TOL_U = 1e-14
_NEG_TOL_V = 1e-12


class InitialDataError(ValueError):
    """Invalid initial data; ``code`` is one of negative_u0 / negative_v0 /
    negative_w0 / zero_u0 / w0_flux / grid_mismatch."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class StepFailure(RuntimeError):
    """A step produced an invariant violation; the caller may retry smaller."""


@dataclass(frozen=True)
class SimParams:
    """Model and integrator parameters.

    chi, xi >= 0 (zero switches a taxis term off), mu >= 0, r > 1.
    linf_cap is the blow-up threshold on ||u||_inf + ||v||_W1inf;
    dt_init acts as the upper cap of the adaptive step.
    taxis_scheme is "upwind" (positivity-preserving, default) or "central"
    (second order, convergence studies only).
    """

    grid: Grid
    chi: float
    xi: float
    mu: float
    a: float
    r: float
    t_end: float
    dt_init: float
    dt_min: float = 1e-10
    linf_cap: float = 1e6
    cfl_safety: float = 0.45
    taxis_scheme: str = "upwind"

    def __post_init__(self):
        if not isinstance(self.grid, Grid):
            raise ValueError("grid must be a Grid")
        for name in ("chi", "xi", "mu"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val >= 0.0):
                raise ValueError(f"{name} must be a finite nonnegative real, got {val}")
        if not np.isfinite(self.a):
            raise ValueError(f"a must be finite, got {self.a}")
        if not self.r > 1.0:
            raise ValueError(f"logistic exponent must satisfy r > 1, got {self.r}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.dt_init > 0.0:
            raise ValueError(f"dt_init must be positive, got {self.dt_init}")
        if not 0.0 < self.dt_min <= self.dt_init:
            raise ValueError(
                f"need 0 < dt_min <= dt_init, got dt_min={self.dt_min}, dt_init={self.dt_init}"
            )
        if not self.linf_cap > 0.0:
            raise ValueError(f"linf_cap must be positive, got {self.linf_cap}")
        if not 0.0 < self.cfl_safety < 1.0:
            raise ValueError(f"cfl_safety must lie in (0,1), got {self.cfl_safety}")
        if self.taxis_scheme not in ("upwind", "central"):
            raise ValueError(f"taxis_scheme must be 'upwind' or 'central', got {self.taxis_scheme!r}")


@dataclass(frozen=True)
class SimState:
    """Solution snapshot at time t.  v_accum is the trapezoid-accumulated
    exposure integral of v since the state's base time (0 for fresh runs,
    the checkpoint time after a reload)."""

    t: float
    step_count: int
    u: ScalarField
    v: ScalarField
    w: ScalarField
    v_accum: ScalarField


class RunStatus(enum.Enum):
    COMPLETED = "Completed"
    BLOW_UP_DETECTED = "BlowUpDetected"
    STEP_SIZE_UNDERFLOW = "StepSizeUnderflow"


@dataclass(frozen=True)
class RunOutcome:
    """status plus the event time (detection or failure time; None when
    Completed) and the recorded diagnostics."""

    status: RunStatus
    t_event: Optional[float]
    records: tuple
    final_state: SimState

    @property
    def t_detect(self) -> Optional[float]:
        return self.t_event if self.status is RunStatus.BLOW_UP_DETECTED else None

    @property
    def t_fail(self) -> Optional[float]:
        return self.t_event if self.status is RunStatus.STEP_SIZE_UNDERFLOW else None


# --- initial data -----------------------------------------------------------


def validate_initial_data(
    u0: ScalarField,
    v0: ScalarField,
    w0: ScalarField,
    flux_tol: float = 1e-2,
) -> tuple[ScalarField, ScalarField, ScalarField]:
    """Check admissibility of the initial triple and return it unchanged.

    Requirements: one shared grid; u0 >= 0 and not identically zero;
    v0 >= 0; w0 >= 0 with discretely vanishing boundary-normal derivative.
    The flux check compares the one-sided difference |w0_1 - w0_0| / h
    against flux_tol * (1 + sup|w0|); for smooth compatible data that
    difference is O(h * curvature), far below the default 1e-2, while a
    linear profile scores its full slope.
    """
    if u0.grid != v0.grid or u0.grid != w0.grid:
        raise InitialDataError("grid_mismatch", "initial fields live on different grids")
    if u0.min() < 0.0:
        raise InitialDataError("negative_u0", f"u0 has negative entries (min {u0.min():.3e})")
    if u0.max() == 0.0:
        raise InitialDataError("zero_u0", "u0 must not be identically zero")
    if v0.min() < 0.0:
        raise InitialDataError("negative_v0", f"v0 has negative entries (min {v0.min():.3e})")
    if w0.min() < 0.0:
        raise InitialDataError("negative_w0", f"w0 has negative entries (min {w0.min():.3e})")
    g = w0.grid
    scale = 1.0 + sup_norm(w0)
    for a in range(g.dim):
        h = g.spacing[a]
        lo = np.take(w0.data, 0, axis=a)
        lo_in = np.take(w0.data, 1, axis=a)
        hi = np.take(w0.data, -1, axis=a)
        hi_in = np.take(w0.data, -2, axis=a)
        flux = max(np.abs(lo_in - lo).max(), np.abs(hi - hi_in).max()) / h
        if flux > flux_tol * scale:
            raise InitialDataError(
                "w0_flux",
                f"w0 boundary-normal difference {flux:.3e} along axis {a} exceeds "
                f"tolerance {flux_tol * scale:.3e}; ECM data must satisfy the "
                f"zero-flux condition",
            )
    return u0, v0, w0


def initial_state(u0: ScalarField, v0: ScalarField, w0: ScalarField) -> SimState:
    """Fresh SimState at t = 0 from a validated triple."""
    return SimState(
        t=0.0,
        step_count=0,
        u=u0.copy(),
        v=v0.copy(),
        w=w0.copy(),
        v_accum=ScalarField.zeros(u0.grid),
    )


# --- per-grid solver cache --------------------------------------------------

_solver_cache: dict[Grid, tuple[HelmholtzCG, SpectralDiffusion]] = {}


def _solvers_for(grid: Grid) -> tuple[HelmholtzCG, SpectralDiffusion]:
    try:
        return _solver_cache[grid]
    except KeyError:
        pair = (HelmholtzCG(grid, tol=V_SOLVE_TOL), SpectralDiffusion(grid))
        if len(_solver_cache) > 16:
            _solver_cache.clear()
        _solver_cache[grid] = pair
        return pair


# --- stepping ---------------------------------------------------------------


def cfl_dt(state: SimState, params: SimParams) -> float:
    """Transport-stability step bound:
    cfl_safety * min over axes of h^2 / (2 dim + h max|velocity|)."""
    g = params.grid
    bound = np.inf
    for a in range(g.dim):
        h = g.spacing[a]
        vmax = 0.0
        if params.chi != 0.0 or params.xi != 0.0:
            face = params.chi * np.diff(state.v.data, axis=a)
            if params.xi != 0.0:
                face = face + params.xi * np.diff(state.w.data, axis=a)
            vmax = float(np.abs(face).max()) / h
        bound = min(bound, h * h / (2.0 * g.dim + h * vmax))
    return params.cfl_safety * bound


def _clamped(data: np.ndarray, tol: float, what: str) -> np.ndarray:
    """Flush negative roundoff to zero; fail the step on real negativity."""
    m = data.min()
    if m >= 0.0:
        return data
    window = tol * max(1.0, float(np.abs(data).max()))
    if m < -window:
        raise StepFailure(f"{what} went negative ({m:.3e}, window {window:.3e})")
    return np.where(data < 0.0, 0.0, data)


def step(state: SimState, dt: float, params: SimParams) -> SimState:
    """One operator-split step of size dt (see module docstring).

    Raises StepFailure on invariant violation and SolverError when the
    implicit v solve stalls; both are retryable with a smaller dt.
    """
    dt = float(dt)
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = params.grid
    if state.u.grid != g:
        raise ValueError("state grid does not match params grid")
    helm, diffusion = _solvers_for(g)

    # (1) implicit relaxation of the enzyme
    rhs = state.v.data + dt * state.u.data
    v_new, _ = helm.solve(rhs, dt, x0=state.v.data)
    v_new = _clamped(v_new, _NEG_TOL_V, "v after implicit solve")

    # (2) exposure increment, trapezoid in time
    incr = 0.5 * dt * (state.v.data + v_new)
    v_accum = state.v_accum.data + incr

    # (3) exact ECM decay on the frozen increment; factor <= 1, so w stays
    # in [0, w^n] nodewise with no clamp needed
    w_new = state.w.data * np.exp(-incr)

    # (4) cell density: transport, diffusion, reaction
    v_field = ScalarField(g, v_new, _checked=True)
    w_field = ScalarField(g, w_new, _checked=True)
    adv = np.zeros(g.node_shape)
    central = params.taxis_scheme == "central"
    if params.chi != 0.0:
        adv += advective_divergence(state.u, v_field, params.chi, central=central).data
    if params.xi != 0.0:
        adv += advective_divergence(state.u, w_field, params.xi, central=central).data
    u_t = state.u.data - dt * adv
    u_t = _clamped(u_t, _NEG_TOL_U, "u after transport")

    u_d = diffusion.solve(u_t, dt)
    u_d = _clamped(u_d, _NEG_TOL_U, "u after diffusion")

    a_pos = max(params.a, 0.0)
    a_neg = max(-params.a, 0.0)
    if params.r == 2.0:
        sink_pow = u_d
    else:
        sink_pow = u_d ** (params.r - 1.0)
    u_new = u_d * (1.0 + dt * a_pos) / (1.0 + dt * (a_neg + params.mu * sink_pow + w_new))

    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new)) and np.all(np.isfinite(w_new))):
        raise StepFailure("step produced non-finite values")

    return SimState(
        t=state.t + dt,
        step_count=state.step_count + 1,
        u=ScalarField(g, u_new, _checked=True),
        v=v_field,
        w=ScalarField(g, w_new, _checked=True),
        v_accum=ScalarField(g, v_accum, _checked=True),
    )


def blow_up_check(state: SimState, cap: float) -> bool:
    """True iff ||u||_inf + ||v||_inf + ||grad v||_inf exceeds cap."""
    total = sup_norm(state.u) + sup_norm(state.v) + gradient_sup_norm(state.v)
    return total > float(cap)


# --- run loop ---------------------------------------------------------------


def run(
    params: SimParams,
    initial: tuple[ScalarField, ScalarField, ScalarField],
    record_every: float,
    lp_powers: Sequence[float] = (),
    on_record: Optional[Callable[[SimState, "diagnostics.DiagnosticsRecord"], None]] = None,
) -> RunOutcome:
    """Advance a validated initial triple to t_end with adaptive dt,
    recording diagnostics at multiples of record_every, checking the
    blow-up criterion after every accepted step."""
    u0, v0, w0 = initial
    state = initial_state(u0, v0, w0)
    return run_from_state(params, state, record_every, lp_powers, on_record)


def run_from_state(
    params: SimParams,
    state: SimState,
    record_every: float,
    lp_powers: Sequence[float] = (),
    on_record: Optional[Callable[[SimState, "diagnostics.DiagnosticsRecord"], None]] = None,
) -> RunOutcome:
    """Run loop entry point that also serves checkpoint continuation; the
    accumulators (v_accum, record integrals) count from the given state."""
    record_every = float(record_every)
    if not record_every > 0.0:
        raise ValueError(f"record_every must be positive, got {record_every}")
    if sup_norm(state.u) >= params.linf_cap:
        raise ValueError(
            f"linf_cap ({params.linf_cap}) must exceed the initial sup norm "
            f"({sup_norm(state.u)})"
        )

    def take(st: SimState, prev):
        rec = diagnostics.snapshot(st, params, lp_powers, prev=prev)
        if on_record is not None:
            on_record(st, rec)
        return rec

    records = [take(state, None)]
    # next record boundary index; the 1e-9 absorbs landings a few ulp short
    k = int(np.floor(state.t / record_every + 1e-9)) + 1

    while state.t < params.t_end - 1e-10:
        target = min(k * record_every, params.t_end)
        dt = min(params.dt_init, cfl_dt(state, params), target - state.t)
        if dt < params.dt_min:
            if state.t > records[-1].t + 1e-12:
                records.append(take(state, records[-1]))
            return RunOutcome(RunStatus.STEP_SIZE_UNDERFLOW, state.t, tuple(records), state)
        new_state = None
        for _ in range(MAX_RETRIES + 1):
            try:
                new_state = step(state, dt, params)
                break
            except (StepFailure, SolverError):
                dt *= 0.5
                if dt < params.dt_min:
                    break
        if new_state is None:
            if state.t > records[-1].t + 1e-12:
                records.append(take(state, records[-1]))
            return RunOutcome(RunStatus.STEP_SIZE_UNDERFLOW, state.t, tuple(records), state)
        state = new_state

        if blow_up_check(state, params.linf_cap):
            records.append(take(state, records[-1]))
            return RunOutcome(RunStatus.BLOW_UP_DETECTED, state.t, tuple(records), state)

        if state.t >= target - 1e-9 * record_every:
            records.append(take(state, records[-1]))
            k = int(np.floor(state.t / record_every + 1e-9)) + 1

    if state.t > records[-1].t + 1e-12:
        records.append(take(state, records[-1]))
    return RunOutcome(RunStatus.COMPLETED, None, tuple(records), state)


# --- checkpointing ----------------------------------------------------------
#
# A checkpoint is a directory: params.txt (key = repr(value) lines, plus t
# and step_count) and the three field snapshots u/v/w in the binary
# snapshot format.  Reloading re-bases the state: v_accum restarts at zero
# and the stored w acts as the new ECM base, which is exactly the
# representation w(t) = w(s0) exp(-int_{s0}^t v) evaluated from the
# checkpoint time.  Continuation from a reload is bit-exact against the
# uninterrupted run because the stepping never consults v_accum.

_CKPT_FIELDS = ("u", "v", "w")


def write_checkpoint(path, params: SimParams, state: SimState) -> None:
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    g = params.grid
    lines = [
        "format = chemohapto-checkpoint-1",
        f"t = {state.t!r}",
        f"step_count = {state.step_count}",
        "cells = " + " ".join(str(c) for c in g.cells),
        "extent = " + " ".join(repr(L) for L in g.extent),
    ]
    for name in (
        "chi", "xi", "mu", "a", "r", "t_end", "dt_init", "dt_min",
        "linf_cap", "cfl_safety",
    ):
        lines.append(f"{name} = {getattr(params, name)!r}")
    lines.append(f"taxis_scheme = {params.taxis_scheme}")
    (d / "params.txt").write_text("\n".join(lines) + "\n")
    for name in _CKPT_FIELDS:
        write_field(getattr(state, name), d / f"{name}.bin", fmt="binary")


def read_checkpoint(path) -> tuple[SimParams, SimState]:
    d = Path(path)
    kv = {}
    for line in (d / "params.txt").read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        kv[key.strip()] = val.strip()
    if kv.get("format") != "chemohapto-checkpoint-1":
        raise ValueError(f"unrecognized checkpoint format in {d}")
    grid = Grid(
        tuple(int(t) for t in kv["cells"].split()),
        tuple(float(t) for t in kv["extent"].split()),
    )
    params = SimParams(
        grid=grid,
        chi=float(kv["chi"]),
        xi=float(kv["xi"]),
        mu=float(kv["mu"]),
        a=float(kv["a"]),
        r=float(kv["r"]),
        t_end=float(kv["t_end"]),
        dt_init=float(kv["dt_init"]),
        dt_min=float(kv["dt_min"]),
        linf_cap=float(kv["linf_cap"]),
        cfl_safety=float(kv["cfl_safety"]),
        taxis_scheme=kv.get("taxis_scheme", "upwind"),
    )
    fields = {}
    for name in _CKPT_FIELDS:
        f = read_field(d / f"{name}.bin")
        if f.grid != grid:
            raise ValueError(f"checkpoint field {name} grid mismatch")
        fields[name] = f
    state = SimState(
        t=float(kv["t"]),
        step_count=int(kv["step_count"]),
        u=fields["u"],
        v=fields["v"],
        w=fields["w"],
        v_accum=ScalarField.zeros(grid),
    )
    return params, state
