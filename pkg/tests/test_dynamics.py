"""Stepper invariants: positivity, exact fixed points, the ECM closed form,
ODE-oracle agreement for homogeneous data, temporal convergence, and
bit-exact checkpoint continuation."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from chemohapto.dynamics import (
    InitialDataError,
    RunStatus,
    SimParams,
    SimState,
    blow_up_check,
    cfl_dt,
    initial_state,
    read_checkpoint,
    run,
    run_from_state,
    step,
    validate_initial_data,
    write_checkpoint,
)
from chemohapto.grid import Grid, ScalarField, integrate


def _params(grid, **kw):
    base = dict(grid=grid, chi=0.0, xi=0.0, mu=1.0, a=1.0, r=2.0,
                t_end=1.0, dt_init=1e-2)
    base.update(kw)
    return SimParams(**base)


# --- parameter validation ----------------------------------------------------


def test_simparams_validation():
    g = Grid((8,), (1.0,))
    with pytest.raises(ValueError):
        _params(g, r=1.0)
    with pytest.raises(ValueError):
        _params(g, chi=-0.1)
    with pytest.raises(ValueError):
        _params(g, dt_min=1.0, dt_init=0.1)
    with pytest.raises(ValueError):
        _params(g, cfl_safety=1.0)
    with pytest.raises(ValueError):
        _params(g, taxis_scheme="weno")
    p = _params(g, chi=0.0, xi=0.0)  # switching both taxis terms off is legal
    assert p.chi == 0.0 and p.xi == 0.0


# --- initial data ------------------------------------------------------------


def test_validate_initial_data_error_codes():
    g = Grid((16,), (1.0,))
    ones = ScalarField.full(g, 1.0)
    zeros = ScalarField.zeros(g)

    with pytest.raises(InitialDataError) as e:
        validate_initial_data(ScalarField.full(Grid((8,), (1.0,)), 1.0), ones, ones)
    assert e.value.code == "grid_mismatch"

    neg = ScalarField(g, np.linspace(-0.1, 1.0, 17))
    for trip, code in [
        ((neg, ones, ones), "negative_u0"),
        ((zeros, ones, ones), "zero_u0"),
        ((ones, neg, ones), "negative_v0"),
        ((ones, ones, neg), "negative_w0"),
    ]:
        with pytest.raises(InitialDataError) as e:
            validate_initial_data(*trip)
        assert e.value.code == code


def test_validate_initial_data_w0_flux():
    g = Grid((32,), (1.0,))
    ones = ScalarField.full(g, 1.0)
    # linear ECM profile w0(x) = x: boundary-normal difference is its slope
    ramp = ScalarField.from_function(g, lambda x: x)
    with pytest.raises(InitialDataError) as e:
        validate_initial_data(ones, ones, ramp)
    assert e.value.code == "w0_flux"
    # constants trivially satisfy the zero-flux condition
    validate_initial_data(ones, ScalarField.zeros(g), ones)
    # a compatible cosine profile passes: its boundary difference shrinks
    # with h (one-sided difference of a zero-slope endpoint is O(h w''))
    g16 = Grid((32,), (16.0,))
    ones16 = ScalarField.full(g16, 1.0)
    cos16 = ScalarField.from_function(g16, lambda x: 0.6 + 0.4 * np.cos(np.pi * x / 16.0))
    validate_initial_data(ones16, ones16, cos16)


# --- single-step exact behavior ---------------------------------------------


def test_homogeneous_fixed_point_is_exact():
    g = Grid((16, 16), (4.0, 4.0))
    p = _params(g, a=1.0, mu=1.0, r=2.0, t_end=10.0, dt_init=1e-2)
    st = initial_state(ScalarField.full(g, 1.0), ScalarField.full(g, 1.0),
                       ScalarField.zeros(g))
    for _ in range(10):
        st = step(st, 1e-2, p)
    assert np.array_equal(st.u.data, np.full(g.node_shape, 1.0))
    assert np.array_equal(st.v.data, np.full(g.node_shape, 1.0))


def test_cubic_fixed_point_is_exact():
    # r = 3, mu = 4, a = 1: plateau (a/mu)^(1/2) = 0.5, all dyadic
    g = Grid((12,), (3.0,))
    p = _params(g, a=1.0, mu=4.0, r=3.0)
    st = initial_state(ScalarField.full(g, 0.5), ScalarField.full(g, 0.5),
                       ScalarField.zeros(g))
    st = step(st, 1e-2, p)
    assert np.array_equal(st.u.data, np.full(13, 0.5))


def test_w_single_step_closed_form():
    g = Grid((8, 8), (2.0, 2.0))
    p = _params(g)
    st = initial_state(ScalarField.full(g, 1.0), ScalarField.full(g, 1.0),
                       ScalarField.full(g, 1.0))
    st = step(st, 0.1, p)
    # v stays exactly 1, so the exposure increment is exactly dt
    assert st.w.data.max() == st.w.data.min()
    assert st.w.data[0, 0] == pytest.approx(np.exp(-0.1), rel=1e-15)
    assert np.array_equal(st.v.data, np.ones(g.node_shape))


def test_step_monotone_w_and_positivity():
    g = Grid((24,), (6.0,))
    rng = np.random.default_rng(2)
    u = ScalarField(g, 0.5 + rng.random(25))
    v = ScalarField(g, rng.random(25))
    w = ScalarField.from_function(g, lambda x: 0.5 + 0.5 * np.cos(np.pi * x / 6.0))
    p = _params(g, chi=1.0, xi=0.5)
    st = initial_state(u, v, w)
    for _ in range(20):
        new = step(st, 2e-3, p)
        assert np.all(new.w.data <= st.w.data)
        assert new.u.min() >= 0.0 and new.v.min() >= 0.0 and new.w.min() >= 0.0
        assert np.all(new.v_accum.data >= st.v_accum.data)
        st = new


def test_v_mass_balance_at_solver_tolerance():
    g = Grid((24, 24), (12.0, 12.0))
    rng = np.random.default_rng(3)
    u = ScalarField(g, 1.0 + 0.3 * rng.random(g.node_shape))
    v = ScalarField.full(g, 0.4)
    w = ScalarField.zeros(g)
    p = _params(g)
    st = initial_state(u, v, w)
    dt = 5e-3
    st2 = step(st, dt, p)
    lhs = (integrate(st2.v) - integrate(st.v)) / dt
    rhs = integrate(st.u) - integrate(st2.v)
    assert abs(lhs - rhs) < 1e-6 * (1.0 + integrate(st.u))


def test_step_argument_checks():
    g = Grid((8,), (1.0,))
    p = _params(g)
    st = initial_state(ScalarField.full(g, 1.0), ScalarField.zeros(g),
                       ScalarField.zeros(g))
    with pytest.raises(ValueError):
        step(st, 0.0, p)
    other = initial_state(ScalarField.full(Grid((9,), (1.0,)), 1.0),
                          ScalarField.zeros(Grid((9,), (1.0,))),
                          ScalarField.zeros(Grid((9,), (1.0,))))
    with pytest.raises(ValueError):
        step(other, 1e-3, p)


# --- step size control -------------------------------------------------------


def test_cfl_dt_pure_diffusion_value():
    g = Grid((32, 32), (16.0, 16.0))
    p = _params(g, chi=0.0, xi=0.0, cfl_safety=0.45)
    st = initial_state(ScalarField.full(g, 1.0), ScalarField.zeros(g),
                       ScalarField.zeros(g))
    h = 0.5
    assert cfl_dt(st, p) == pytest.approx(0.45 * h * h / 4.0, rel=1e-14)


def test_cfl_dt_shrinks_with_taxis_velocity():
    g = Grid((32,), (16.0,))
    p0 = _params(g, chi=0.0)
    p1 = _params(g, chi=10.0)
    st = initial_state(ScalarField.full(g, 1.0),
                       ScalarField.from_function(g, lambda x: x),
                       ScalarField.zeros(g))
    assert cfl_dt(st, p1) < cfl_dt(st, p0)


def test_underflow_reported_when_cfl_undercuts_dt_min():
    # steep enzyme gradient plus huge sensitivity forces dt below dt_min
    g = Grid((64,), (16.0,))
    p = _params(g, chi=100.0, dt_init=1e-2, dt_min=1e-3, t_end=1.0)
    u = ScalarField.full(g, 1.0)
    v = ScalarField.from_function(g, lambda x: 100.0 * x / 16.0)
    w = ScalarField.zeros(g)
    out = run_from_state(p, initial_state(u, v, w), record_every=0.5)
    assert out.status is RunStatus.STEP_SIZE_UNDERFLOW
    assert out.t_fail == 0.0
    assert out.t_detect is None
    ts = [r.t for r in out.records]
    assert ts == sorted(set(ts))  # strictly increasing, no duplicate records


# --- blow-up detection --------------------------------------------------------


def test_blow_up_check_basics():
    g = Grid((16,), (4.0,))
    small = initial_state(ScalarField.full(g, 1.0), ScalarField.zeros(g),
                          ScalarField.zeros(g))
    assert not blow_up_check(small, 1e9)
    spike = np.ones(17)
    spike[8] = 11.0
    st = SimState(t=0.0, step_count=0, u=ScalarField(g, spike),
                  v=ScalarField.zeros(g), w=ScalarField.zeros(g),
                  v_accum=ScalarField.zeros(g))
    assert blow_up_check(st, 10.0)


def test_manufactured_growth_detection_time():
    g = Grid((16, 16), (8.0, 8.0))
    p = _params(g, a=5.0, mu=0.0, chi=0.0, xi=0.0, t_end=2.0,
                dt_init=1e-3, linf_cap=10.0)
    trip = (ScalarField.full(g, 1.0), ScalarField.zeros(g), ScalarField.zeros(g))
    out = run(p, validate_initial_data(*trip), record_every=0.05)
    assert out.status is RunStatus.BLOW_UP_DETECTED
    target = np.log(10.0) / 5.0
    assert abs(out.t_detect - target) <= 0.1 * target


def test_linf_cap_must_clear_initial_data():
    g = Grid((8,), (1.0,))
    p = _params(g, linf_cap=0.5)
    trip = (ScalarField.full(g, 1.0), ScalarField.zeros(g), ScalarField.zeros(g))
    with pytest.raises(ValueError):
        run(p, trip, record_every=0.1)


# --- homogeneous reduction ----------------------------------------------------


def test_homogeneous_run_tracks_ode_oracle():
    g = Grid((16, 16), (8.0, 8.0))
    p = _params(g, a=1.0, mu=1.0, r=2.0, t_end=5.0, dt_init=1e-3)
    trip = (ScalarField.full(g, 0.5), ScalarField.full(g, 0.5), ScalarField.zeros(g))
    out = run(p, validate_initial_data(*trip), record_every=1.0)
    assert out.status is RunStatus.COMPLETED

    sol = solve_ivp(lambda t, y: [y[0] * (1.0 - y[0]), y[0] - y[1]],
                    (0.0, 5.0), [0.5, 0.5], method="DOP853",
                    rtol=1e-12, atol=1e-14)
    u_ref, v_ref = sol.y[0, -1], sol.y[1, -1]
    fs = out.final_state
    assert fs.u.max() == pytest.approx(u_ref, rel=2e-4)
    assert fs.v.max() == pytest.approx(v_ref, rel=2e-4)
    # spatial homogeneity is preserved to well below the documented 1e-11
    for f in (fs.u, fs.v):
        assert f.max() - f.min() < 1e-11


def test_w_identity_throughout_run():
    g = Grid((16,), (8.0,))
    p = _params(g, chi=0.5, xi=0.3, t_end=1.0, dt_init=2e-3)
    rng = np.random.default_rng(8)
    u = ScalarField(g, 1.0 + rng.random(17))
    v = ScalarField.full(g, 0.5)
    w0 = ScalarField.from_function(g, lambda x: 0.6 + 0.4 * np.cos(np.pi * x / 8.0))
    devs = []

    def watch(st, rec):
        devs.append(np.abs(st.w.data - w0.data * np.exp(-st.v_accum.data)).max())

    out = run(p, validate_initial_data(u, v, w0), record_every=0.1, on_record=watch)
    assert out.status is RunStatus.COMPLETED
    assert max(devs) <= 1e-12


# --- temporal self-convergence -------------------------------------------------


def test_temporal_self_convergence_order():
    g = Grid((64,), (16.0,))
    u0 = ScalarField.from_function(g, lambda x: 1.0 + 0.5 * np.cos(np.pi * x / 16.0))
    v0 = ScalarField.full(g, 0.5)
    w0 = ScalarField.from_function(g, lambda x: 0.6 + 0.4 * np.cos(np.pi * x / 16.0))
    trip = validate_initial_data(u0, v0, w0)

    def terminal_u(dt):
        p = _params(g, chi=0.8, xi=0.4, mu=0.5, a=1.0, r=2.0,
                    t_end=0.5, dt_init=dt)
        out = run(p, trip, record_every=0.5)
        assert out.status is RunStatus.COMPLETED
        return out.final_state.u.data

    ref = terminal_u(5e-4)
    e1 = np.abs(terminal_u(4e-3) - ref).max()
    e2 = np.abs(terminal_u(2e-3) - ref).max()
    order = np.log2(e1 / e2)
    assert order >= 0.9


# --- record cadence -----------------------------------------------------------


def test_records_land_on_cadence():
    g = Grid((16,), (4.0,))
    p = _params(g, t_end=1.0, dt_init=1e-3)
    trip = (ScalarField.full(g, 1.0), ScalarField.zeros(g), ScalarField.zeros(g))
    out = run(p, trip, record_every=0.25)
    ts = [r.t for r in out.records]
    assert len(ts) == 5
    assert np.allclose(ts, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-9)
    assert all(b > a for a, b in zip(ts, ts[1:]))
    with pytest.raises(ValueError):
        run(p, trip, record_every=0.0)


# --- checkpointing -------------------------------------------------------------


def test_checkpoint_roundtrip_and_bit_exact_continuation(tmp_path):
    g = Grid((24, 24), (12.0, 12.0))
    rng = np.random.default_rng(3)
    p = _params(g, chi=1.0, xi=0.7, mu=0.5, a=1.0, r=2.0, t_end=1.0, dt_init=5e-3)
    u0 = ScalarField(g, 1.0 + 0.3 * rng.random(g.node_shape))
    v0 = ScalarField.full(g, 0.4)
    w0 = ScalarField.from_function(
        g, lambda x, y: 0.6 + 0.4 * np.cos(np.pi * x / 12.0) * np.cos(np.pi * y / 12.0))
    trip = validate_initial_data(u0, v0, w0)

    straight = run(p, trip, record_every=0.25)

    half = run(SimParams(**{**p.__dict__, "t_end": 0.5}), trip, record_every=0.25)
    ck = tmp_path / "ck"
    write_checkpoint(ck, p, half.final_state)
    p2, st2 = read_checkpoint(ck)
    assert p2 == p
    assert st2.t == half.final_state.t
    assert st2.step_count == half.final_state.step_count
    # the reload re-bases the exposure integral at the checkpoint time
    assert st2.v_accum.max() == 0.0
    for name in ("u", "v", "w"):
        assert np.array_equal(getattr(st2, name).data,
                              getattr(half.final_state, name).data)

    resumed = run_from_state(p2, st2, record_every=0.25)
    assert resumed.status is RunStatus.COMPLETED
    for name in ("u", "v", "w"):
        assert np.array_equal(getattr(resumed.final_state, name).data,
                              getattr(straight.final_state, name).data)
    assert resumed.final_state.step_count == straight.final_state.step_count


def test_checkpoint_rejects_foreign_format(tmp_path):
    d = tmp_path / "ck"
    d.mkdir()
    (d / "params.txt").write_text("format = something-else\n")
    with pytest.raises(ValueError):
        read_checkpoint(d)
