"""Scenario configuration, presets, parameter sweeps, and result emission.

Configs are flat, line-oriented ``key = value`` text files.  Blank lines and
lines starting with ``#`` are skipped.  Unknown keys are hard errors, as are
duplicates.  The full key list:

===============  =========================================================
key              meaning
===============  =========================================================
grid             required, ``<dim>d <cells> <extents>``, e.g. ``2d 64,64 16,16``
t_end            required, final time
chi              required, chemotactic sensitivity (>= 0)
xi               required, haptotactic sensitivity (>= 0)
mu               required, damping coefficient (>= 0)
a                required, growth rate
r                required, logistic exponent (> 1)
dt_init          step-size cap, default 0.01
dt_min           underflow threshold, default 1e-10
linf_cap         blow-up threshold, number or ``auto`` (default;
                 resolves to 1e6*(1+sup u0) once initial data is built)
cfl_safety       CFL fraction in (0,1), default 0.45
taxis_scheme     ``upwind`` (default) or ``central``
init             ``homogeneous`` (default), ``bump``, or ``files``
u0 v0 w0         homogeneous levels (defaults 1.0, 0.0, 1.0); for
                 ``bump`` only v0/w0 apply, as constant backgrounds
bump_center      comma-separated coordinates, default domain center
bump_width       gaussian width, default 1.0
bump_mass        integral of u0; the profile is normalized so that the
                 discrete integral equals this exactly (default 1.0)
u0_file v0_file w0_file   snapshot paths for ``init = files``
perturb_u0       multiplicative noise amplitude p: u0 *= 1 + p*U[0,1)
seed             RNG seed for the perturbation, default 0
record_every     diagnostics cadence, default t_end/50
outputs          output directory, default ``out``
lp_powers        comma-separated extra p for the u Lp diagnostics column
creg_gamma       exponent for the regularity-constant surrogate,
                 default dim/2 + 1
creg_surrogate   number to use directly, or ``auto`` (default) to
                 estimate on a fixed 1d probe grid
sweep_axis       ``mu``, ``r``, or ``chi`` (no default; sweep-only)
sweep_values     comma-separated, strictly increasing (sweep-only)
sweep_jobs       parallel width, default 1 (sweep-only)
===============  =========================================================

``run_scenario`` emits, inside the output directory: ``resolved.cfg`` (the
config with every default made explicit; reloading it reproduces the same
ScenarioConfig), ``diagnostics.csv``, a terminal ``checkpoint/`` directory,
and ``summary.txt``.  ``run_sweep`` adds one subdirectory per axis value
plus a ``sweep.csv`` table.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .constants import threshold_report
from .diagnostics import (apriori_violation, c_beta_from_field, estimate_c_reg,
                          write_diagnostics_csv)
from .dynamics import (RunOutcome, RunStatus, SimParams, initial_state, run,
                       validate_initial_data, write_checkpoint)
from .grid import Grid, ScalarField, integrate, read_field

__all__ = [
    "ConfigError",
    "HomogeneousInit",
    "BumpInit",
    "FilesInit",
    "ScenarioConfig",
    "SweepSpec",
    "SweepRow",
    "PRESET_NAMES",
    "preset_config",
    "load_config",
    "parse_config_text",
    "format_config",
    "build_fields",
    "resolve_params",
    "run_scenario",
    "build_sweep_spec",
    "run_sweep",
    "status_exit_code",
]


class ConfigError(ValueError):
    """Raised for unparseable or invalid configuration input."""


# --- configuration types ---


@dataclass(frozen=True)
class HomogeneousInit:
    u0: float
    v0: float
    w0: float


@dataclass(frozen=True)
class BumpInit:
    """Gaussian u0 normalized to a prescribed integral, constant v0/w0."""

    center: tuple
    width: float
    mass: float
    v0: float
    w0: float


@dataclass(frozen=True)
class FilesInit:
    u0_path: str
    v0_path: str
    w0_path: str


@dataclass(frozen=True)
class ScenarioConfig:
    params: SimParams
    initial_data: object
    record_every: float
    outputs: str
    seed: int
    perturb_u0: float = 0.0
    lp_powers: tuple = ()
    # linf_cap in params is a placeholder while this is True; the real cap
    # is derived from the built initial data in resolve_params.
    linf_cap_auto: bool = True
    creg_gamma: float = 2.0
    creg_surrogate: float | None = None
    sweep_axis: str | None = None
    sweep_values: tuple | None = None
    sweep_jobs: int | None = None


@dataclass(frozen=True)
class SweepSpec:
    """A one-axis parameter scan around a base scenario."""

    base: ScenarioConfig
    axis: str
    values: tuple
    parallel_width: int = 1

    def __post_init__(self):
        if self.axis not in ("mu", "r", "chi"):
            raise ConfigError(f"sweep axis must be mu, r, or chi, got '{self.axis}'")
        if len(self.values) == 0:
            raise ConfigError("sweep values must be nonempty")
        vals = tuple(float(v) for v in self.values)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        if self.axis == "r" and any(v <= 1.0 for v in vals):
            raise ConfigError("sweep over r requires every value > 1")
        if self.axis == "mu" and any(v < 0.0 for v in vals):
            raise ConfigError("sweep over mu requires every value >= 0")
        if self.axis == "chi" and any(v <= 0.0 for v in vals):
            raise ConfigError("sweep over chi requires every value > 0")
        if self.parallel_width < 1:
            raise ConfigError("parallel width must be a positive integer")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SweepRow:
    value: float
    status: str
    peak_linf_u: float
    t_peak: float
    final_functional: float
    outdir: str


# --- parsing ---

_REQUIRED_KEYS = ("grid", "t_end", "chi", "xi", "mu", "a", "r")

_KNOWN_KEYS = _REQUIRED_KEYS + (
    "dt_init", "dt_min", "linf_cap", "cfl_safety", "taxis_scheme",
    "init", "u0", "v0", "w0",
    "bump_center", "bump_width", "bump_mass",
    "u0_file", "v0_file", "w0_file",
    "perturb_u0", "seed", "record_every", "outputs", "lp_powers",
    "creg_gamma", "creg_surrogate",
    "sweep_axis", "sweep_values", "sweep_jobs",
)


def _parse_float(raw, where, key):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: key '{key}' expects a number, got '{raw}'") from None


def _parse_int(raw, where, key):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{where}: key '{key}' expects an integer, got '{raw}'") from None


def _parse_float_list(raw, where, key):
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(_parse_float(tok.strip(), where, key) for tok in raw.split(","))


def _parse_grid_value(raw, where):
    toks = raw.split()
    if len(toks) != 3 or not toks[0].endswith("d"):
        raise ConfigError(
            f"{where}: grid expects '<dim>d <cells> <extents>', got '{raw}'")
    try:
        dim = int(toks[0][:-1])
    except ValueError:
        raise ConfigError(f"{where}: bad dimension token '{toks[0]}'") from None
    cells = tuple(_parse_int(t, where, "grid") for t in toks[1].split(","))
    extent = tuple(_parse_float(t, where, "grid") for t in toks[2].split(","))
    if len(cells) != dim or len(extent) != dim:
        raise ConfigError(
            f"{where}: grid lists {len(cells)} cell counts and "
            f"{len(extent)} extents for dimension {dim}")
    try:
        return Grid(cells, extent)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config_text(text, source="<config>", overrides=None):
    """Parse config text into a ScenarioConfig.

    overrides is an optional mapping of key to raw string value (the CLI's
    ``--set key=value``), applied on top of the file before validation.
    """
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got '{stripped}'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        if key in raw:
            raise ConfigError(
                f"{source}:{lineno}: duplicate key '{key}' (first set on line {lines[key]})")
        raw[key] = value
        lines[key] = lineno
    if overrides:
        for key, value in overrides.items():
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"{source}: unknown key '{key}' in override")
            raw[key] = str(value)
            lines[key] = 0

    def where(key):
        n = lines.get(key, 0)
        return f"{source}:{n}" if n else source

    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"{source}: required keys missing: {', '.join(missing)}")

    grid = _parse_grid_value(raw["grid"], where("grid"))
    t_end = _parse_float(raw["t_end"], where("t_end"), "t_end")

    # initial data block
    mode = raw.get("init", "homogeneous")
    if mode not in ("homogeneous", "bump", "files"):
        raise ConfigError(f"{where('init')}: init must be homogeneous, bump, or files")
    allowed = {
        "homogeneous": ("u0", "v0", "w0"),
        "bump": ("bump_center", "bump_width", "bump_mass", "v0", "w0"),
        "files": ("u0_file", "v0_file", "w0_file"),
    }[mode]
    init_keys = ("u0", "v0", "w0", "bump_center", "bump_width", "bump_mass",
                 "u0_file", "v0_file", "w0_file")
    for key in init_keys:
        if key in raw and key not in allowed:
            raise ConfigError(f"{where(key)}: key '{key}' is not used with init = {mode}")

    if mode == "homogeneous":
        initial = HomogeneousInit(
            u0=_parse_float(raw.get("u0", "1.0"), where("u0"), "u0"),
            v0=_parse_float(raw.get("v0", "0.0"), where("v0"), "v0"),
            w0=_parse_float(raw.get("w0", "1.0"), where("w0"), "w0"),
        )
        if initial.u0 <= 0:
            raise ConfigError(f"{where('u0')}: homogeneous u0 must be positive (u0 >= 0, u0 not identically zero)")
        if initial.v0 < 0 or initial.w0 < 0:
            raise ConfigError(f"{source}: homogeneous v0 and w0 must be nonnegative")
    elif mode == "bump":
        default_center = ",".join(repr(L / 2.0) for L in grid.extent)
        center = _parse_float_list(raw.get("bump_center", default_center),
                                   where("bump_center"), "bump_center")
        if len(center) != grid.dim:
            raise ConfigError(
                f"{where('bump_center')}: bump_center needs {grid.dim} coordinates, got {len(center)}")
        width = _parse_float(raw.get("bump_width", "1.0"), where("bump_width"), "bump_width")
        mass = _parse_float(raw.get("bump_mass", "1.0"), where("bump_mass"), "bump_mass")
        if width <= 0:
            raise ConfigError(f"{where('bump_width')}: bump_width must be positive")
        if mass <= 0:
            raise ConfigError(f"{where('bump_mass')}: bump_mass must be positive")
        initial = BumpInit(
            center=center, width=width, mass=mass,
            v0=_parse_float(raw.get("v0", "0.0"), where("v0"), "v0"),
            w0=_parse_float(raw.get("w0", "1.0"), where("w0"), "w0"),
        )
        if initial.v0 < 0 or initial.w0 < 0:
            raise ConfigError(f"{source}: background v0 and w0 must be nonnegative")
    else:
        for key in ("u0_file", "v0_file", "w0_file"):
            if key not in raw:
                raise ConfigError(f"{source}: init = files requires {key}")
            if not os.path.isfile(raw[key]):
                raise ConfigError(f"{where(key)}: no such file '{raw[key]}'")
        initial = FilesInit(raw["u0_file"], raw["v0_file"], raw["w0_file"])

    # solver parameters; SimParams re-validates, translate its complaints
    linf_raw = raw.get("linf_cap", "auto")
    linf_auto = linf_raw == "auto"
    linf_cap = 1e6 if linf_auto else _parse_float(linf_raw, where("linf_cap"), "linf_cap")
    scheme = raw.get("taxis_scheme", "upwind")
    try:
        params = SimParams(
            grid=grid,
            chi=_parse_float(raw["chi"], where("chi"), "chi"),
            xi=_parse_float(raw["xi"], where("xi"), "xi"),
            mu=_parse_float(raw["mu"], where("mu"), "mu"),
            a=_parse_float(raw["a"], where("a"), "a"),
            r=_parse_float(raw["r"], where("r"), "r"),
            t_end=t_end,
            dt_init=_parse_float(raw.get("dt_init", "0.01"), where("dt_init"), "dt_init"),
            dt_min=_parse_float(raw.get("dt_min", "1e-10"), where("dt_min"), "dt_min"),
            linf_cap=linf_cap,
            cfl_safety=_parse_float(raw.get("cfl_safety", "0.45"),
                                    where("cfl_safety"), "cfl_safety"),
            taxis_scheme=scheme,
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    record_every = _parse_float(raw.get("record_every", repr(t_end / 50.0)),
                                where("record_every"), "record_every")
    if not 0.0 < record_every <= t_end:
        raise ConfigError(
            f"{where('record_every')}: record_every must lie in (0, t_end]")

    perturb = _parse_float(raw.get("perturb_u0", "0.0"), where("perturb_u0"), "perturb_u0")
    if perturb < 0:
        raise ConfigError(f"{where('perturb_u0')}: perturb_u0 must be nonnegative")

    creg_raw = raw.get("creg_surrogate", "auto")
    creg_surrogate = None if creg_raw == "auto" else _parse_float(
        creg_raw, where("creg_surrogate"), "creg_surrogate")
    creg_gamma = _parse_float(raw.get("creg_gamma", repr(grid.dim / 2.0 + 1.0)),
                              where("creg_gamma"), "creg_gamma")
    if creg_gamma <= 1:
        raise ConfigError(f"{where('creg_gamma')}: creg_gamma must exceed 1")

    sweep_axis = raw.get("sweep_axis")
    sweep_values = (_parse_float_list(raw["sweep_values"], where("sweep_values"), "sweep_values")
                    if "sweep_values" in raw else None)
    sweep_jobs = (_parse_int(raw["sweep_jobs"], where("sweep_jobs"), "sweep_jobs")
                  if "sweep_jobs" in raw else None)

    return ScenarioConfig(
        params=params,
        initial_data=initial,
        record_every=record_every,
        outputs=raw.get("outputs", "out"),
        seed=_parse_int(raw.get("seed", "0"), where("seed"), "seed"),
        perturb_u0=perturb,
        lp_powers=_parse_float_list(raw.get("lp_powers", ""), where("lp_powers"), "lp_powers"),
        linf_cap_auto=linf_auto,
        creg_gamma=creg_gamma,
        creg_surrogate=creg_surrogate,
        sweep_axis=sweep_axis,
        sweep_values=sweep_values,
        sweep_jobs=sweep_jobs,
    )


def load_config(path, overrides=None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from None
    return parse_config_text(text, source=str(path), overrides=overrides)


def format_config(cfg):
    """Render a config with every default made explicit.

    parse_config_text(format_config(cfg)) reproduces cfg exactly; floats go
    through repr, which round-trips.
    """
    p = cfg.params
    g = p.grid
    out = []
    out.append("grid = {}d {} {}".format(
        g.dim, ",".join(str(c) for c in g.cells), ",".join(repr(L) for L in g.extent)))
    out.append(f"t_end = {p.t_end!r}")
    for key in ("chi", "xi", "mu", "a", "r", "dt_init", "dt_min", "cfl_safety"):
        out.append(f"{key} = {getattr(p, key)!r}")
    out.append("linf_cap = " + ("auto" if cfg.linf_cap_auto else repr(p.linf_cap)))
    out.append(f"taxis_scheme = {p.taxis_scheme}")
    init = cfg.initial_data
    if isinstance(init, HomogeneousInit):
        out.append("init = homogeneous")
        out.append(f"u0 = {init.u0!r}")
        out.append(f"v0 = {init.v0!r}")
        out.append(f"w0 = {init.w0!r}")
    elif isinstance(init, BumpInit):
        out.append("init = bump")
        out.append("bump_center = " + ",".join(repr(c) for c in init.center))
        out.append(f"bump_width = {init.width!r}")
        out.append(f"bump_mass = {init.mass!r}")
        out.append(f"v0 = {init.v0!r}")
        out.append(f"w0 = {init.w0!r}")
    else:
        out.append("init = files")
        out.append(f"u0_file = {init.u0_path}")
        out.append(f"v0_file = {init.v0_path}")
        out.append(f"w0_file = {init.w0_path}")
    out.append(f"perturb_u0 = {cfg.perturb_u0!r}")
    out.append(f"seed = {cfg.seed}")
    out.append(f"record_every = {cfg.record_every!r}")
    out.append(f"outputs = {cfg.outputs}")
    out.append("lp_powers = " + ",".join(repr(q) for q in cfg.lp_powers))
    out.append(f"creg_gamma = {cfg.creg_gamma!r}")
    out.append("creg_surrogate = " + ("auto" if cfg.creg_surrogate is None
                                      else repr(cfg.creg_surrogate)))
    if cfg.sweep_axis is not None:
        out.append(f"sweep_axis = {cfg.sweep_axis}")
    if cfg.sweep_values is not None:
        out.append("sweep_values = " + ",".join(repr(v) for v in cfg.sweep_values))
    if cfg.sweep_jobs is not None:
        out.append(f"sweep_jobs = {cfg.sweep_jobs}")
    return "\n".join(out) + "\n"


# --- initial data assembly ---


def build_fields(cfg):
    """Materialize the initial (u0, v0, w0) triple, seeded perturbation included."""
    grid = cfg.params.grid
    init = cfg.initial_data
    if isinstance(init, HomogeneousInit):
        u = ScalarField.full(grid, init.u0)
        v = ScalarField.full(grid, init.v0)
        w = ScalarField.full(grid, init.w0)
    elif isinstance(init, BumpInit):
        coords = grid.meshgrid()
        rho2 = np.zeros(grid.node_shape)
        for x, c in zip(coords, init.center):
            rho2 = rho2 + (x - c) ** 2
        profile = np.exp(-rho2 / (2.0 * init.width ** 2))
        base = integrate(ScalarField(grid, profile))
        u = ScalarField(grid, (init.mass / base) * profile)
        v = ScalarField.full(grid, init.v0)
        w = ScalarField.full(grid, init.w0)
    else:
        u = read_field(init.u0_path)
        v = read_field(init.v0_path)
        w = read_field(init.w0_path)
        for name, f in (("u0", u), ("v0", v), ("w0", w)):
            if f.grid != grid:
                raise ConfigError(
                    f"{name} snapshot grid {f.grid.cells} does not match config grid {grid.cells}")
    if cfg.perturb_u0 > 0.0:
        rng = np.random.default_rng(cfg.seed)
        u = u.with_data(u.data * (1.0 + cfg.perturb_u0 * rng.random(grid.node_shape)))
    return validate_initial_data(u, v, w)


def resolve_params(cfg, u0):
    """Finalize SimParams; an auto linf_cap becomes 1e6*(1+sup u0)."""
    if not cfg.linf_cap_auto:
        return cfg.params
    return replace(cfg.params, linf_cap=1e6 * (1.0 + float(np.abs(u0.data).max())))


# --- scenario and sweep drivers ---

_CREG_CACHE = {}


def _cached_creg(gamma):
    # fixed 1d probe grid keeps the surrogate cheap and reproducible
    if gamma not in _CREG_CACHE:
        probe = Grid((64,), (4.0,))
        _CREG_CACHE[gamma] = estimate_c_reg(gamma, probe, t_end=4.0, dt=4e-3)
    return _CREG_CACHE[gamma]


def _summary_lines(cfg, params, outcome, triple, wall):
    recs = outcome.records
    peak_idx = max(range(len(recs)), key=lambda i: recs[i].linf_u)
    last = recs[-1]
    functional = last.mass_u + last.l2_v_sq + last.h1_v_seminorm_sq
    lines = [
        f"status = {outcome.status.value}",
        f"t_reached = {outcome.final_state.t!r}",
        f"steps = {outcome.final_state.step_count}",
        f"peak_linf_u = {recs[peak_idx].linf_u:.12e}",
        f"t_peak = {recs[peak_idx].t!r}",
        f"final_mass_u = {last.mass_u:.12e}",
        f"final_l2_v_sq = {last.l2_v_sq:.12e}",
        f"final_h1_v_sq = {last.h1_v_seminorm_sq:.12e}",
        f"final_functional = {functional:.12e}",
        f"wall_time_s = {wall:.3f}",
    ]
    if outcome.status is RunStatus.BLOW_UP_DETECTED:
        lines.insert(1, f"t_detect = {outcome.t_event!r}")
    elif outcome.status is RunStatus.STEP_SIZE_UNDERFLOW:
        lines.insert(1, f"t_fail = {outcome.t_event!r}")

    # damping-threshold report; both constants are heuristic surrogates,
    # the taxis-free estimator for the regularity constant and the initial
    # ECM profile for the sensitivity constant
    xi_eff = params.xi if params.xi > 0 else 1e-12
    c_beta = c_beta_from_field(xi_eff, triple[2], beta=1.0)
    c_reg = cfg.creg_surrogate
    if c_reg is None:
        c_reg = _cached_creg(cfg.creg_gamma).c_reg
    rep = threshold_report(params.grid.dim, params.chi, c_beta, c_reg, mu=params.mu)
    lines += [
        f"c_beta_surrogate_heuristic = {c_beta:.12e}",
        f"c_reg_surrogate_heuristic = {c_reg:.12e}",
        f"mu_star = {rep.mu_star:.12e}",
        f"mu = {params.mu!r}",
    ]
    if rep.q0 is not None:
        lines.append(f"q0 = {rep.q0:.12e}")
    elif params.mu > rep.mu_star:
        lines.append("q0 = none found on search grid")
    return lines


def run_scenario(cfg, on_record=None):
    """Run one configured scenario and emit its output files.

    Returns the RunOutcome.  Files written under cfg.outputs: resolved.cfg,
    diagnostics.csv, checkpoint/, summary.txt.
    """
    os.makedirs(cfg.outputs, exist_ok=True)
    with open(os.path.join(cfg.outputs, "resolved.cfg"), "w", encoding="utf-8") as fh:
        fh.write(format_config(cfg))

    triple = build_fields(cfg)
    params = resolve_params(cfg, triple[0])
    start = time.perf_counter()
    outcome = run(params, triple, cfg.record_every,
                  lp_powers=cfg.lp_powers, on_record=on_record)
    wall = time.perf_counter() - start

    write_diagnostics_csv(os.path.join(cfg.outputs, "diagnostics.csv"),
                          outcome.records)
    write_checkpoint(os.path.join(cfg.outputs, "checkpoint"),
                     params, outcome.final_state)
    lines = _summary_lines(cfg, params, outcome, triple, wall)
    with open(os.path.join(cfg.outputs, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return outcome


def status_exit_code(status):
    return {
        RunStatus.COMPLETED: 0,
        RunStatus.BLOW_UP_DETECTED: 2,
        RunStatus.STEP_SIZE_UNDERFLOW: 3,
    }[status]


def build_sweep_spec(cfg, axis=None, values=None, jobs=None):
    """Combine CLI flags with the config's sweep_* keys; flags win."""
    axis = axis if axis is not None else cfg.sweep_axis
    values = tuple(values) if values is not None else cfg.sweep_values
    jobs = jobs if jobs is not None else cfg.sweep_jobs
    if axis is None:
        raise ConfigError("sweep needs an axis (flag --axis or key sweep_axis)")
    if values is None:
        raise ConfigError("sweep needs values (flag --values or key sweep_values)")
    return SweepSpec(base=cfg, axis=axis, values=values,
                     parallel_width=1 if jobs is None else jobs)


def _sweep_point(spec, value):
    base = spec.base
    sub = os.path.join(base.outputs, f"{spec.axis}={value:g}")
    cfg = replace(base,
                  params=replace(base.params, **{spec.axis: value}),
                  outputs=sub,
                  sweep_axis=None, sweep_values=None, sweep_jobs=None)
    try:
        outcome = run_scenario(cfg)
    except (ConfigError, ValueError, RuntimeError) as exc:
        return SweepRow(value=value, status=f"Error({type(exc).__name__})",
                        peak_linf_u=float("nan"), t_peak=float("nan"),
                        final_functional=float("nan"), outdir=sub)
    recs = outcome.records
    k = max(range(len(recs)), key=lambda i: recs[i].linf_u)
    last = recs[-1]
    return SweepRow(
        value=value,
        status=outcome.status.value,
        peak_linf_u=recs[k].linf_u,
        t_peak=recs[k].t,
        final_functional=last.mass_u + last.l2_v_sq + last.h1_v_seminorm_sq,
        outdir=sub,
    )


def run_sweep(spec):
    """Run every sweep point, write sweep.csv, return the rows sorted by value.

    Points run independently, up to parallel_width at a time.  A failing
    point contributes an error row; the sweep continues.
    """
    os.makedirs(spec.base.outputs, exist_ok=True)
    if spec.parallel_width == 1:
        rows = [_sweep_point(spec, v) for v in spec.values]
    else:
        with ThreadPoolExecutor(max_workers=spec.parallel_width) as pool:
            rows = list(pool.map(lambda v: _sweep_point(spec, v), spec.values))
    rows.sort(key=lambda r: r.value)
    path = os.path.join(spec.base.outputs, "sweep.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value,status,peak_linf_u,t_peak,final_functional\n")
        for r in rows:
            fh.write(f"{r.value!r},{r.status},{r.peak_linf_u:.12e},"
                     f"{r.t_peak:.12e},{r.final_functional:.12e}\n")
    return rows


# --- presets ---

# Each preset is ordinary config text and goes through the same parser as a
# user file; outputs defaults to out/<name> and can be overridden.
_PRESETS = {
    # homogeneous data rides the 2-ODE reduction u'=u(a-mu u^(r-1)), v'=u-v
    "logistic-homogeneous": """
        grid = 2d 32,32 16,16
        t_end = 10.0
        chi = 0.0
        xi = 0.0
        mu = 1.0
        a = 1.0
        r = 2.0
        dt_init = 1e-3
        init = homogeneous
        u0 = 0.5
        v0 = 0.5
        w0 = 0.0
        record_every = 0.5
    """,
    # cubic sink, plateau (a/mu)^(1/(r-1)) = 0.5 approached from below
    "logistic-approach-r3": """
        grid = 2d 32,32 16,16
        t_end = 10.0
        chi = 0.0
        xi = 0.0
        mu = 4.0
        a = 1.0
        r = 3.0
        dt_init = 1e-3
        init = homogeneous
        u0 = 0.1
        v0 = 0.1
        w0 = 0.0
        record_every = 0.5
    """,
    # no taxis, no reaction: mass of u is exactly conserved; 1e4 steps
    "pure-diffusion": """
        grid = 2d 64,64 16,16
        t_end = 1.0
        chi = 0.0
        xi = 0.0
        mu = 0.0
        a = 0.0
        r = 2.0
        dt_init = 1e-4
        init = bump
        bump_width = 1.2
        bump_mass = 50.0
        v0 = 0.0
        w0 = 0.0
        record_every = 0.1
    """,
    # u grows like e^(5t) from homogeneous data; cap 10*sup(u0) trips the
    # detector near t = ln(10)/5, slightly early since v adds to the norm
    "manufactured-growth": """
        grid = 2d 32,32 16,16
        t_end = 2.0
        chi = 0.0
        xi = 0.0
        mu = 0.0
        a = 5.0
        r = 2.0
        dt_init = 1e-3
        linf_cap = 10.0
        init = homogeneous
        u0 = 1.0
        v0 = 0.0
        w0 = 0.0
        record_every = 0.05
    """,
    # quadratic damping in 2d: bounded for every mu > 0; noisy start near
    # the plateau a/mu = 10 with a live ECM field
    "invasion-2d": """
        grid = 2d 128,128 32,32
        t_end = 50.0
        chi = 1.0
        xi = 0.5
        mu = 0.1
        a = 1.0
        r = 2.0
        dt_init = 0.01
        init = homogeneous
        u0 = 10.0
        v0 = 10.0
        w0 = 1.0
        perturb_u0 = 0.1
        seed = 7
        record_every = 1.0
    """,
    # superquadratic sink r = 3 at small damping, plateau sqrt(a/mu)
    "invasion-2d-r3": """
        grid = 2d 128,128 32,32
        t_end = 50.0
        chi = 1.0
        xi = 0.5
        mu = 0.2
        a = 1.0
        r = 3.0
        dt_init = 0.01
        init = homogeneous
        u0 = 2.0
        v0 = 2.0
        w0 = 1.0
        perturb_u0 = 0.1
        seed = 7
        record_every = 1.0
    """,
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_text(name):
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset '{name}'; have {', '.join(PRESET_NAMES)}")
    body = "\n".join(line.strip() for line in _PRESETS[name].strip().splitlines())
    return body + f"\noutputs = out/{name}\n"


def preset_config(name, overrides=None):
    return parse_config_text(preset_text(name), source=f"<preset {name}>",
                             overrides=overrides)


def scan_violations(records, factor=10.0):
    """Times where the mass/L2/H1 functional exceeds factor times its start."""
    first = records[0]
    bound = factor * (first.mass_u + first.l2_v_sq + first.h1_v_seminorm_sq)
    return apriori_violation(records, bound)
