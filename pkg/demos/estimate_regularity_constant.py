"""Empirical surrogates for the two constants the damping threshold needs.

The regularity constant is witnessed by driving the signal equation with a
frozen family of synthetic forcings and taking the worst smoothing ratio;
the low-order constant comes from sup norms of a sample ECM profile.  Both
then feed the threshold report.
"""

import numpy as np

from chemohapto.constants import threshold_report
from chemohapto.diagnostics import c_beta_from_field, estimate_c_reg
from chemohapto.grid import Grid, ScalarField

probe = Grid((64,), (4.0,))

# --- regularity constant, two integrability orders ---

for gamma in (2.0, 2.5):
    est = estimate_c_reg(gamma, probe, t_end=4.0, dt=4e-3)
    print(f"gamma = {gamma:g}:")
    for name, ratio in est.ratios:
        marker = "  <-- max" if ratio == est.c_reg else ""
        print(f"  {name:<12} ratio {ratio:.6f}{marker}")
    print(f"  c_reg estimate: {est.c_reg:.6f}\n")

# --- low-order constant from an ECM profile ---

ecm = Grid((96, 96), (24.0, 24.0))
x, y = ecm.meshgrid()
w0 = ScalarField(ecm, 0.6 + 0.4 * np.cos(np.pi * x / 24.0) * np.cos(np.pi * y / 24.0))
xi, beta = 0.5, 1.0
c_beta = c_beta_from_field(xi, w0, beta)
print(f"sample ECM profile on {ecm.cells}: c_beta = {c_beta:.6f} (xi = {xi}, beta = {beta})")
print()

# --- threshold report wired from the surrogates ---

gamma = 2.0
c_reg = estimate_c_reg(gamma, probe, t_end=4.0, dt=4e-3).c_reg
for dim, chi, mu in ((2, 1.0, 0.05), (3, 1.0, 1.2)):
    rep = threshold_report(dim, chi, c_beta, c_reg, mu=mu)
    print(f"N = {dim}, chi = {chi}, mu = {mu}:")
    print(f"  mu_star = {rep.mu_star:.6f}")
    if rep.q0 is not None:
        print(f"  admissible integrability order q0 = {rep.q0:.6f}")
    elif mu > rep.mu_star:
        print("  no admissible order on the search grid")
    else:
        print("  mu below threshold, no order claimed")
