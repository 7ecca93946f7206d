"""Scan the logistic damping strength and tabulate the outcomes.

The planar quadratic model stays bounded for every positive damping, so
the interesting quantity is not survival but how hard the cell peak gets
squeezed as mu grows.  Demo scale again: 48^2 cells, t_end = 10.
"""

import os

from chemohapto.harness import SweepSpec, preset_config, run_sweep

OUT = os.path.join(os.path.dirname(__file__), "out", "damping-sweep")

base = preset_config("invasion-2d", overrides={
    "grid": "2d 48,48 32,32",
    "t_end": "10.0",
    "record_every": "0.5",
    "outputs": OUT,
})

values = (0.05, 0.2, 0.8)
print(f"sweeping mu over {values} (two points at a time)")
rows = run_sweep(SweepSpec(base, "mu", values, parallel_width=2))

print(f"{'mu':>6}  {'status':<12} {'peak sup u':>14} {'at t':>8} {'final functional':>18}")
for row in rows:
    print(f"{row.value:>6g}  {row.status:<12} {row.peak_linf_u:>14.6e}"
          f" {row.t_peak:>8g} {row.final_functional:>18.6e}")

print(f"\nper-point outputs under {OUT}/mu=<value>/")
print(f"machine-readable table: {os.path.join(OUT, 'sweep.csv')}")
