"""One invasion scenario end to end, then a restart from its checkpoint.

Takes the 2D invasion preset, shrinks it to demo scale so the whole script
finishes in seconds, runs it through the scenario driver (which writes
resolved.cfg, diagnostics.csv, a terminal checkpoint, and summary.txt),
and finally reloads the checkpoint to push the simulation further without
recomputing the first leg.
"""

import os
from dataclasses import replace

from chemohapto.dynamics import read_checkpoint, run_from_state
from chemohapto.harness import preset_config, run_scenario

OUT = os.path.join(os.path.dirname(__file__), "out", "invasion")

# demo scale: quarter resolution, fifth horizon
cfg = preset_config("invasion-2d", overrides={
    "grid": "2d 64,64 32,32",
    "t_end": "10.0",
    "record_every": "0.5",
    "outputs": OUT,
})

print(f"running invasion scenario into {OUT}")
outcome = run_scenario(cfg)
print(f"  status      {outcome.status.value}")
print(f"  t reached   {outcome.final_state.t:g}")
print(f"  steps       {outcome.final_state.step_count}")
print(f"  records     {len(outcome.records)}")

last = outcome.records[-1]
print(f"  final mass_u      {last.mass_u:.6e}")
print(f"  final sup u       {last.linf_u:.6e}")
print(f"  final ECM minimum {outcome.final_state.w.min():.6e}")
print()

# --- restart leg ---

params, state = read_checkpoint(os.path.join(OUT, "checkpoint"))
print(f"checkpoint reloaded at t = {state.t:g}; continuing to t = 15")
extended = replace(params, t_end=15.0)
more = run_from_state(extended, state, record_every=0.5)

print(f"  status      {more.status.value}")
print(f"  t reached   {more.final_state.t:g}")
w_then = outcome.final_state.w.max()
w_now = more.final_state.w.max()
print(f"  sup w: {w_then:.6e} at t=10  ->  {w_now:.6e} at t=15 (degradation continues)")

for line in open(os.path.join(OUT, "summary.txt"), encoding="utf-8"):
    if line.startswith(("mu_star", "mu ", "q0")):
        print("  summary: " + line.rstrip())
