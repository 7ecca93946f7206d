"""Config parsing, scenario orchestration, sweeps, and the CLI front end."""

import math
import os
from dataclasses import replace

import numpy as np
import pytest

from chemohapto.cli import main
from chemohapto.diagnostics import read_diagnostics_csv
from chemohapto.dynamics import RunStatus
from chemohapto.grid import Grid, ScalarField, write_field
from chemohapto.harness import (
    BumpInit,
    ConfigError,
    HomogeneousInit,
    PRESET_NAMES,
    SweepSpec,
    build_fields,
    build_sweep_spec,
    format_config,
    parse_config_text,
    preset_config,
    preset_text,
    resolve_params,
    run_scenario,
    run_sweep,
    scan_violations,
    status_exit_code,
)
from chemohapto import __version__

TINY = """\
grid = 1d 16 8.0
t_end = 0.2
chi = 0.0
xi = 0.0
mu = 1.0
a = 1.0
r = 2.0
dt_init = 0.01
u0 = 1.0
v0 = 0.0
w0 = 1.0
record_every = 0.05
creg_surrogate = 1.5
"""


def _tiny(tmp_path, extra="", **overrides):
    text = TINY + extra + f"\noutputs = {tmp_path / 'out'}\n"
    return parse_config_text(text, source="<tiny>", overrides=overrides)


# --- parsing ------------------------------------------------------------------


def test_parse_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=r"<cfg>:2: unknown key 'bogus'"):
        parse_config_text("grid = 1d 8 1.0\nbogus = 3\n", source="<cfg>")


def test_parse_duplicate_key():
    text = "chi = 0.0\nt_end = 1.0\nchi = 1.0\n"
    with pytest.raises(ConfigError, match=r"duplicate key 'chi' \(first set on line 1\)"):
        parse_config_text(text, source="<cfg>")


def test_parse_missing_required_lists_all():
    with pytest.raises(ConfigError, match=r"required keys missing: chi, xi, mu, a, r"):
        parse_config_text("grid = 1d 8 1.0\nt_end = 1.0\n", source="<cfg>")


@pytest.mark.parametrize("raw, frag", [
    ("2x 8 1.0", "grid expects"),
    ("2d 8 1.0,1.0", "1 cell counts and 2 extents"),
    ("1d eight 1.0", "expects an integer"),
])
def test_parse_bad_grid(raw, frag):
    text = f"grid = {raw}\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
    with pytest.raises(ConfigError, match=frag):
        parse_config_text(text, source="<cfg>")


def test_parse_bad_logistic_exponent():
    text = "grid = 1d 8 1.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 0.5\n"
    with pytest.raises(ConfigError, match="r > 1"):
        parse_config_text(text, source="<cfg>")


def test_parse_record_every_window(tmp_path):
    with pytest.raises(ConfigError, match=r"record_every must lie in \(0, t_end\]"):
        _tiny(tmp_path, record_every="5.0")


def test_parse_files_mode_checks_existence(tmp_path):
    extra = (f"init = files\nu0_file = {tmp_path}/missing.bin\n"
             f"v0_file = {tmp_path}/missing.bin\nw0_file = {tmp_path}/missing.bin\n")
    text = ("grid = 1d 16 8.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            + extra)
    with pytest.raises(ConfigError, match="no such file"):
        parse_config_text(text, source="<cfg>")


def test_parse_bump_center_arity():
    text = ("grid = 2d 8,8 4.0,4.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            "init = bump\nbump_center = 2.0\n")
    with pytest.raises(ConfigError, match="bump_center needs 2 coordinates, got 1"):
        parse_config_text(text, source="<cfg>")


def test_parse_mode_gated_keys():
    text = ("grid = 1d 8 4.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            "init = bump\nu0 = 2.0\n")
    with pytest.raises(ConfigError, match=r"key 'u0' is not used with init = bump"):
        parse_config_text(text, source="<cfg>")


def test_parse_unknown_override(tmp_path):
    with pytest.raises(ConfigError, match=r"unknown key 'nope' in override"):
        _tiny(tmp_path, nope="1")


def test_parse_bad_init_mode():
    text = ("grid = 1d 8 4.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            "init = gaussian\n")
    with pytest.raises(ConfigError, match="init must be homogeneous, bump, or files"):
        parse_config_text(text, source="<cfg>")


def test_parse_defaults():
    text = "grid = 2d 8,8 4.0,4.0\nt_end = 5.0\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
    cfg = parse_config_text(text, source="<cfg>")
    assert cfg.initial_data == HomogeneousInit(u0=1.0, v0=0.0, w0=1.0)
    assert cfg.record_every == pytest.approx(0.1)  # t_end / 50
    assert cfg.params.dt_init == 0.01
    assert cfg.linf_cap_auto
    assert cfg.creg_gamma == 2.0  # dim/2 + 1
    assert cfg.outputs == "out"


def test_bump_center_defaults_to_domain_center():
    text = ("grid = 2d 8,8 4.0,6.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            "init = bump\n")
    cfg = parse_config_text(text, source="<cfg>")
    assert isinstance(cfg.initial_data, BumpInit)
    assert cfg.initial_data.center == (2.0, 3.0)


# --- round-trip ---------------------------------------------------------------


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_preset_roundtrip(name):
    cfg = preset_config(name)
    again = parse_config_text(format_config(cfg), source="<rt>")
    assert again == cfg


def test_roundtrip_files_and_sweep_keys(tmp_path):
    g = Grid((12,), (6.0,))
    for stem in ("u", "v", "w"):
        write_field(ScalarField.full(g, 1.0), tmp_path / f"{stem}.bin")
    text = (f"grid = 1d 12 6.0\nt_end = 1\nchi = 0.5\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            f"init = files\nu0_file = {tmp_path}/u.bin\n"
            f"v0_file = {tmp_path}/v.bin\nw0_file = {tmp_path}/w.bin\n"
            f"sweep_axis = mu\nsweep_values = 0.5,1.0\nsweep_jobs = 2\n"
            f"lp_powers = 2.0,4.0\nlinf_cap = 50.0\n")
    cfg = parse_config_text(text, source="<cfg>")
    assert parse_config_text(format_config(cfg), source="<rt>") == cfg
    assert not cfg.linf_cap_auto and cfg.params.linf_cap == 50.0
    assert cfg.sweep_values == (0.5, 1.0)


def test_preset_text_unknown_name():
    with pytest.raises(ConfigError, match="unknown preset"):
        preset_text("no-such-preset")
    assert len(PRESET_NAMES) == 6


# --- field assembly -----------------------------------------------------------


def test_build_fields_homogeneous(tmp_path):
    cfg = _tiny(tmp_path, u0="2.0", v0="0.25", w0="0.5")
    u, v, w = build_fields(cfg)
    assert np.all(u.data == 2.0) and np.all(v.data == 0.25) and np.all(w.data == 0.5)


def test_build_fields_bump_mass_is_exact():
    text = ("grid = 2d 24,24 8.0,8.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            "init = bump\nbump_width = 0.9\nbump_mass = 7.5\n")
    cfg = parse_config_text(text, source="<cfg>")
    u, _, _ = build_fields(cfg)
    from chemohapto.grid import integrate
    assert integrate(u) == pytest.approx(7.5, rel=1e-12)


def test_build_fields_perturbation_is_seeded(tmp_path):
    cfg = _tiny(tmp_path, perturb_u0="0.1", seed="9")
    u1 = build_fields(cfg)[0]
    u2 = build_fields(cfg)[0]
    assert np.array_equal(u1.data, u2.data)
    assert u1.data.min() >= 1.0 and u1.data.max() <= 1.1
    other = build_fields(replace(cfg, seed=10))[0]
    assert not np.array_equal(u1.data, other.data)


def test_build_fields_files_roundtrip(tmp_path):
    g = Grid((16,), (8.0,))
    rng = np.random.default_rng(3)
    u0 = ScalarField(g, 0.5 + rng.random(17))
    write_field(u0, tmp_path / "u.bin")
    write_field(ScalarField.full(g, 0.1), tmp_path / "v.bin")
    write_field(ScalarField.full(g, 1.0), tmp_path / "w.bin")
    extra = (f"init = files\nu0_file = {tmp_path}/u.bin\n"
             f"v0_file = {tmp_path}/v.bin\nw0_file = {tmp_path}/w.bin\n")
    text = ("grid = 1d 16 8.0\nt_end = 1\nchi = 0\nxi = 0\nmu = 1\na = 1\nr = 2\n"
            + extra)
    u, v, w = build_fields(parse_config_text(text, source="<cfg>"))
    assert np.array_equal(u.data, u0.data)

    mismatched = text.replace("grid = 1d 16 8.0", "grid = 1d 32 8.0")
    with pytest.raises(ConfigError, match="does not match config grid"):
        build_fields(parse_config_text(mismatched, source="<cfg>"))


def test_resolve_params_auto_cap(tmp_path):
    cfg = _tiny(tmp_path, u0="3.0")
    u0 = build_fields(cfg)[0]
    assert resolve_params(cfg, u0).linf_cap == 1e6 * 4.0
    pinned = _tiny(tmp_path, linf_cap="123.0")
    assert resolve_params(pinned, u0).linf_cap == 123.0


# --- scenario driver ----------------------------------------------------------


def test_run_scenario_outputs(tmp_path):
    cfg = _tiny(tmp_path)
    outcome = run_scenario(cfg)
    assert outcome.status is RunStatus.COMPLETED
    out = tmp_path / "out"
    for name in ("resolved.cfg", "diagnostics.csv", "summary.txt"):
        assert (out / name).is_file()
    assert (out / "checkpoint" / "params.txt").is_file()

    summary = (out / "summary.txt").read_text().splitlines()
    assert summary[0] == "status = Completed"
    assert any(line.startswith("mu_star = ") for line in summary)
    assert any(line.startswith("c_reg_surrogate_heuristic = 1.5") for line in summary)

    header, data = read_diagnostics_csv(out / "diagnostics.csv")
    assert header[0] == "t"
    assert np.all(np.diff(data[:, 0]) > 0)
    assert data[-1, 0] == pytest.approx(0.2, abs=1e-9)

    resolved = (out / "resolved.cfg").read_text()
    assert parse_config_text(resolved, source="<resolved>") == cfg


def test_status_exit_codes():
    assert status_exit_code(RunStatus.COMPLETED) == 0
    assert status_exit_code(RunStatus.BLOW_UP_DETECTED) == 2
    assert status_exit_code(RunStatus.STEP_SIZE_UNDERFLOW) == 3


def test_scan_violations_on_healthy_run(tmp_path):
    outcome = run_scenario(_tiny(tmp_path))
    assert scan_violations(outcome.records, factor=10.0) == []


# --- sweeps ---------------------------------------------------------------------


def test_sweep_spec_validation(tmp_path):
    base = _tiny(tmp_path)
    with pytest.raises(ConfigError, match="axis must be mu, r, or chi"):
        SweepSpec(base, "a", (1.0, 2.0))
    with pytest.raises(ConfigError, match="nonempty"):
        SweepSpec(base, "mu", ())
    with pytest.raises(ConfigError, match="strictly increasing"):
        SweepSpec(base, "mu", (1.0, 1.0))
    with pytest.raises(ConfigError, match="r requires every value > 1"):
        SweepSpec(base, "r", (0.5, 2.0))
    with pytest.raises(ConfigError, match="mu requires every value >= 0"):
        SweepSpec(base, "mu", (-1.0, 2.0))
    with pytest.raises(ConfigError, match="chi requires every value > 0"):
        SweepSpec(base, "chi", (0.0, 2.0))
    with pytest.raises(ConfigError, match="positive integer"):
        SweepSpec(base, "mu", (1.0,), parallel_width=0)
    with pytest.raises(ConfigError, match="needs an axis"):
        build_sweep_spec(base)
    with pytest.raises(ConfigError, match="needs values"):
        build_sweep_spec(base, axis="mu")


def test_sweep_point_matches_standalone_run(tmp_path):
    base = _tiny(tmp_path, chi="0.5", xi="0.25", perturb_u0="0.05", seed="3")
    rows = run_sweep(SweepSpec(base, "mu", (0.5,)))
    assert len(rows) == 1 and rows[0].status == "Completed"

    solo_dir = tmp_path / "solo"
    solo = replace(base, params=replace(base.params, mu=0.5), outputs=str(solo_dir))
    run_scenario(solo)
    swept = tmp_path / "out" / "mu=0.5"
    assert (swept / "diagnostics.csv").read_bytes() == (solo_dir / "diagnostics.csv").read_bytes()
    for stem in ("u", "v", "w"):
        assert ((swept / "checkpoint" / f"{stem}.bin").read_bytes()
                == (solo_dir / "checkpoint" / f"{stem}.bin").read_bytes())


def test_sweep_over_r(tmp_path):
    base = _tiny(tmp_path)
    rows = run_sweep(SweepSpec(base, "r", (2.5, 3.0, 4.0)))
    assert [row.value for row in rows] == [2.5, 3.0, 4.0]
    assert all(row.status == "Completed" for row in rows)
    table = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    assert table[0] == "value,status,peak_linf_u,t_peak,final_functional"
    assert len(table) == 4


def test_sweep_survives_error_rows(tmp_path):
    # a cap below the initial sup norm makes every point fail fast
    base = _tiny(tmp_path, linf_cap="0.5")
    rows = run_sweep(SweepSpec(base, "mu", (0.5, 1.0)))
    assert all(row.status == "Error(ValueError)" for row in rows)
    assert all(math.isnan(row.peak_linf_u) for row in rows)
    assert (tmp_path / "out" / "sweep.csv").is_file()


def test_build_sweep_spec_flags_win(tmp_path):
    base = _tiny(tmp_path, sweep_axis="mu", sweep_values="0.5,1.0", sweep_jobs="4")
    spec = build_sweep_spec(base)
    assert (spec.axis, spec.values, spec.parallel_width) == ("mu", (0.5, 1.0), 4)
    spec = build_sweep_spec(base, axis="r", values=(2.0, 3.0), jobs=1)
    assert (spec.axis, spec.values, spec.parallel_width) == ("r", (2.0, 3.0), 1)


# --- CLI ------------------------------------------------------------------------


def _write_tiny_cfg(tmp_path, extra=""):
    path = tmp_path / "case.cfg"
    path.write_text(TINY + extra + f"outputs = {tmp_path / 'out'}\n")
    return path


def test_cli_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__


def test_cli_run_config_file(tmp_path, capsys):
    assert main(["run", str(_write_tiny_cfg(tmp_path))]) == 0
    out = capsys.readouterr().out
    assert "status: Completed" in out
    assert (tmp_path / "out" / "summary.txt").is_file()


def test_cli_run_missing_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_cli_run_preset_with_overrides(tmp_path, capsys):
    code = main(["run", "logistic-homogeneous",
                 "--set", "grid=2d 8,8 16,16",
                 "--set", "t_end=0.5",
                 "--set", "creg_surrogate=1.5",
                 "--set", f"outputs={tmp_path / 'preset-out'}"])
    assert code == 0
    assert "status: Completed" in capsys.readouterr().out
    resolved = (tmp_path / "preset-out" / "resolved.cfg").read_text()
    assert "t_end = 0.5" in resolved
    assert "grid = 2d 8,8 16.0,16.0" in resolved


def test_cli_set_without_equals(tmp_path, capsys):
    assert main(["run", str(_write_tiny_cfg(tmp_path)), "--set", "t_end"]) == 1
    assert "--set expects key=value" in capsys.readouterr().err


def test_cli_sweep_flags_override_keys(tmp_path, capsys):
    cfg = _write_tiny_cfg(tmp_path, extra="sweep_axis = mu\nsweep_values = 0.25,0.75\n")
    assert main(["sweep", str(cfg), "--axis", "r", "--values", "2.5,3.5"]) == 0
    out = capsys.readouterr().out
    assert "r=2.5: Completed" in out and "r=3.5: Completed" in out
    assert (tmp_path / "out" / "r=2.5").is_dir()
    assert not (tmp_path / "out" / "mu=0.25").exists()


def test_cli_sweep_from_config_keys(tmp_path, capsys):
    cfg = _write_tiny_cfg(tmp_path, extra="sweep_axis = mu\nsweep_values = 0.25,0.75\n")
    assert main(["sweep", str(cfg)]) == 0
    assert "table:" in capsys.readouterr().out
    assert (tmp_path / "out" / "sweep.csv").is_file()


def test_cli_sweep_bad_values(tmp_path, capsys):
    cfg = _write_tiny_cfg(tmp_path)
    assert main(["sweep", str(cfg), "--axis", "mu", "--values", "a,b"]) == 1
    assert "comma-separated numbers" in capsys.readouterr().err


def test_cli_constants(capsys):
    code = main(["constants", "--dim", "3", "--chi", "2.0", "--cbeta", "1.0",
                 "--creg", "8.0", "--mu", "3.0"])
    assert code == 0
    out = capsys.readouterr().out
    assert "mu_star = 2.29739670999407" in out
    assert "q0 = " in out


def test_cli_constants_subcritical_reports_none(capsys):
    assert main(["constants", "--dim", "3", "--chi", "2.0", "--cbeta", "1.0",
                 "--creg", "8.0", "--mu", "1.0"]) == 0
    assert "q0 = none (mu <= mu_star)" in capsys.readouterr().out


def test_cli_estimate_creg(capsys):
    code = main(["estimate-creg", "--gamma", "2.0", "--grid", "1d 16 2.0",
                 "--t-end", "1.0", "--dt", "0.01"])
    assert code == 0
    assert "c_reg = " in capsys.readouterr().out
