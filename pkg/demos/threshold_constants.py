"""Tour of the analysis-constants toolbox.

Walks the full chain: the weighted Young minimization that balances a
dissipation term against a taxis payload, the damping threshold mu_star it
feeds, the integrability-order search above the threshold, and the sup-norm
iteration that converts an L^p ladder into an L^infinity bound.
"""

import numpy as np

from chemohapto import (
    a1_coefficient,
    minimize_weighted_young,
    moser_sup_bound,
    mu_star,
    threshold_report,
    weighted_young_objective,
)

# --- weighted Young minimization ---

print("A1 coefficients (interior minimum of y + A1 y^-delta):")
for delta in (1.0, 2.0, 3.0, 5.0):
    print(f"  delta = {delta:g}:  A1 = {a1_coefficient(delta):.10f}")
print()

ym = minimize_weighted_young(delta=2.0, coeff=1.0, c_reg=1.0)
print(f"delta=2, coeff=1, c_reg=1:  argmin = {ym.y_star!r}, min = {ym.min_value!r}")

# sanity: nudge the argmin either way, the objective can only go up
for bump in (0.99, 1.01):
    moved = weighted_young_objective(bump * ym.y_star, 2.0, 1.0, 1.0)
    print(f"  objective at {bump:g} * argmin: {moved:.12f}  (+{moved - ym.min_value:.3e})")
print()

# --- damping threshold across dimensions ---

chi, c_beta, c_reg = 2.0, 1.0, 8.0
print(f"mu_star for chi = {chi}, c_beta = {c_beta}, c_reg = {c_reg}:")
for dim in (1, 2, 3, 4):
    print(f"  N = {dim}:  mu_star = {mu_star(dim, chi, c_beta, c_reg)!r}")
print("(zero in N <= 2: any positive damping suffices there)")
print()

# --- integrability order above the threshold ---

for mu in (2.0, 2.4, 4.0):
    rep = threshold_report(3, chi, c_beta, c_reg, mu=mu)
    verdict = f"q0 = {rep.q0:.6f}" if rep.q0 is not None else "no admissible order found"
    side = ">" if mu > rep.mu_star else "<="
    print(f"  mu = {mu:g} {side} mu_star = {rep.mu_star:.6f}:  {verdict}")
print()

# --- sup-norm bootstrap ---

trace = moser_sup_bound(m0=1.0, lam=2.0, i_max=12)
print("sup-norm iteration, lam = 2, m0 = 1 (roots M_i^(1/2^i)):")
for level in trace.levels[:8]:
    print(f"  i = {level.i:2d}  p = {level.p:6g}  root = {level.root:.12f}")
print(f"stabilized bound: {trace.sup_root!r}  (= 2^0.75 = {2.0 ** 0.75!r})")
