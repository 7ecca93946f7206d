"""Simulator and analysis constants for a chemotaxis-haptotaxis system.

The model couples a migrating cell density u, a diffusible chemoattractant
v, and a static extracellular matrix density w on a box with no-flux
boundaries:

    u_t = lap(u) - chi div(u grad v) - xi div(u grad w) + u(a - mu u^(r-1) - w)
    v_t = lap(v) - v + u
    w_t = -v w

with a generalized logistic exponent r > 1.  ``grid`` holds the spatial
discretization, ``dynamics`` the positivity-preserving time stepper,
``diagnostics`` the norm tracking and the two empirical constants,
``constants`` the closed-form analysis helpers (damping threshold,
weighted Young minimization, iterative sup bound), and ``harness`` the
config, preset, and sweep plumbing behind the ``chemohapto`` CLI.
"""

from .constants import (MoserLevel, MoserTrace, ThresholdReport, YoungMinimum,
                        a1_coefficient, gn_exponent, minimize_weighted_young,
                        moser_sup_bound, mu_star, select_q0, threshold_report,
                        weighted_young_objective)
from .diagnostics import (CRegEstimate, DiagnosticsRecord, Forcing,
                          RegularityEstimate, apriori_violation,
                          c_beta_estimate, c_beta_from_field, estimate_c_reg,
                          forcing_family, maximal_regularity_estimate,
                          read_diagnostics_csv, snapshot,
                          write_diagnostics_csv)
from .dynamics import (InitialDataError, RunOutcome, RunStatus, SimParams,
                       SimState, StepFailure, blow_up_check, cfl_dt,
                       initial_state, read_checkpoint, run, run_from_state,
                       step, validate_initial_data, write_checkpoint)
from .grid import (Grid, ScalarField, advective_divergence, gradient_sq,
                   gradient_sup_norm, integrate, integrate_power, laplacian,
                   read_field, sup_norm, write_field)
from .harness import (BumpInit, ConfigError, FilesInit, HomogeneousInit,
                      PRESET_NAMES, ScenarioConfig, SweepRow, SweepSpec,
                      build_fields, build_sweep_spec, format_config,
                      load_config, parse_config_text, preset_config,
                      run_scenario, run_sweep, status_exit_code)

__version__ = "0.1.0"

__all__ = [
    "Grid", "ScalarField", "laplacian", "advective_divergence",
    "gradient_sq", "gradient_sup_norm", "integrate", "integrate_power",
    "sup_norm", "write_field", "read_field",
    "SimParams", "SimState", "RunStatus", "RunOutcome", "InitialDataError",
    "StepFailure", "validate_initial_data", "initial_state", "step", "run",
    "run_from_state", "cfl_dt", "blow_up_check", "write_checkpoint",
    "read_checkpoint",
    "DiagnosticsRecord", "snapshot", "apriori_violation",
    "write_diagnostics_csv", "read_diagnostics_csv", "Forcing",
    "forcing_family", "RegularityEstimate", "CRegEstimate",
    "maximal_regularity_estimate", "estimate_c_reg", "c_beta_estimate",
    "c_beta_from_field",
    "YoungMinimum", "ThresholdReport", "MoserLevel", "MoserTrace",
    "a1_coefficient", "weighted_young_objective", "minimize_weighted_young",
    "mu_star", "select_q0", "threshold_report", "gn_exponent",
    "moser_sup_bound",
    "ConfigError", "HomogeneousInit", "BumpInit", "FilesInit",
    "ScenarioConfig", "SweepSpec", "SweepRow", "PRESET_NAMES",
    "preset_config", "load_config", "parse_config_text", "format_config",
    "build_fields", "run_scenario", "build_sweep_spec", "run_sweep",
    "status_exit_code",
    "__version__",
]
