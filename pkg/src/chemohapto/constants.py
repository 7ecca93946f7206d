"""Closed-form constants behind the boundedness analysis of the invasion
model.

Everything in here is scalar arithmetic: the sharp coefficient of the
weighted Young inequality, the critical damping strength mu_star separating
the always-bounded regime from the conditional one, the search for an
admissible integrability exponent q0, the interpolation exponent used in the
L^p bootstrap, and the sup-norm bound produced by the iteration argument.

Conventions
-----------
chi, xi >= 0 are the chemotactic / haptotactic sensitivities, mu >= 0 the
damping strength, r > 1 the damping exponent, N the space dimension.
c_beta is the combined low-order constant assembled from the ECM data (see
:func:`chemohapto.diagnostics.c_beta_estimate`), c_reg the maximal-regularity
constant of the parabolic relaxation equation at a given exponent.

The quantity minimized by :func:`minimize_weighted_young` is

    H(y) = y + A1(delta) * y**(-delta) * coeff**(delta+1) * c_reg

whose optimum is attained at

    y* = (A1 * c_reg * delta)**(1/(delta+1)) * coeff

with value ((delta-1)/delta) * c_reg**(1/(delta+1)) * coeff.  At delta == 1
the split degenerates and the weighted bound carries no free minimum; that
path reports 0 by convention and is kept out of YoungMinimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

__all__ = [
    "YoungMinimum",
    "ThresholdReport",
    "MoserLevel",
    "MoserTrace",
    "a1_coefficient",
    "weighted_young_objective",
    "minimize_weighted_young",
    "mu_star",
    "select_q0",
    "threshold_report",
    "gn_exponent",
    "moser_sup_bound",
]

# q0 search grid: geometric, just above N/2, fixed width and resolution so
# reported thresholds are reproducible across runs and machines.
_Q0_GRID_POINTS = 10_000
_Q0_GRID_LIFT = 1.0 + 1e-3
_Q0_GRID_SPAN = 50.0


@dataclass(frozen=True)
class YoungMinimum:
    """Argmin and value of the weighted Young objective."""

    y_star: float
    min_value: float


@dataclass(frozen=True)
class ThresholdReport:
    """Damping threshold summary for one parameter point.

    q0 is the smallest admissible integrability exponent found on the
    search grid, or None when either no damping strength was supplied or
    no grid point satisfies the strict inequality.
    """

    dim: int
    chi: float
    c_beta: float
    c_reg: float
    mu_star: float
    mu: Optional[float] = None
    q0: Optional[float] = None


@dataclass(frozen=True)
class MoserLevel:
    """One level of the sup-norm iteration: exponent p_i = 2**i.

    The level bound is kept as log_bound because the raw value overflows
    float64 for modest i; ``bound`` materializes it when it fits."""

    i: int
    p: float
    log_bound: float
    root: float

    @property
    def bound(self) -> float:
        try:
            return math.exp(self.log_bound)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class MoserTrace:
    m0: float
    lam: float
    levels: tuple[MoserLevel, ...]
    sup_root: float


# --- weighted Young inequality -------------------------------------------


def a1_coefficient(delta: float) -> float:
    """Sharp coefficient A1(delta) = (1/(delta+1)) ((delta+1)/delta)^(-delta)
    ((delta-1)/delta)^(delta+1), for delta >= 1.

    A1(1) = 0: the weighted split closes only for delta > 1.
    """
    delta = float(delta)
    if not delta >= 1.0:
        raise ValueError(f"delta must be >= 1, got {delta}")
    if delta == 1.0:
        return 0.0
    return (
        1.0
        / (delta + 1.0)
        * ((delta + 1.0) / delta) ** (-delta)
        * ((delta - 1.0) / delta) ** (delta + 1.0)
    )


def weighted_young_objective(y: float, delta: float, coeff: float, c_reg: float) -> float:
    """H(y) = y + A1 * y^(-delta) * coeff^(delta+1) * c_reg for y > 0."""
    y = float(y)
    if y <= 0.0:
        raise ValueError(f"objective is defined for y > 0, got {y}")
    a1 = a1_coefficient(delta)
    return y + a1 * y ** (-float(delta)) * float(coeff) ** (float(delta) + 1.0) * float(c_reg)


def minimize_weighted_young(delta: float, coeff: float, c_reg: float) -> YoungMinimum:
    """Closed-form minimizer of the weighted Young objective.

    Requires delta > 1 strictly (the delta == 1 degeneration has no interior
    minimum), coeff > 0 and c_reg > 0.
    """
    delta = float(delta)
    coeff = float(coeff)
    c_reg = float(c_reg)
    if not delta > 1.0:
        raise ValueError(f"delta must exceed 1, got {delta}")
    if not coeff > 0.0:
        raise ValueError(f"coeff must be positive, got {coeff}")
    if not c_reg > 0.0:
        raise ValueError(f"c_reg must be positive, got {c_reg}")
    a1 = a1_coefficient(delta)
    y_star = (a1 * c_reg * delta) ** (1.0 / (delta + 1.0)) * coeff
    min_value = (delta - 1.0) / delta * c_reg ** (1.0 / (delta + 1.0)) * coeff
    return YoungMinimum(y_star=y_star, min_value=min_value)


# --- damping thresholds ----------------------------------------------------


def mu_star(dim: int, chi: float, c_beta: float, c_reg: float) -> float:
    """Critical damping strength for the quadratic (r = 2) model:

        mu_star = ((N-2)_+ / N) * (chi + c_beta) * c_reg^(1/(N/2+1))

    Exactly 0.0 in dimensions 1 and 2, where any positive damping keeps the
    system bounded.
    """
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")
    chi = float(chi)
    c_beta = float(c_beta)
    c_reg = float(c_reg)
    if chi < 0.0 or c_beta <= 0.0 or c_reg <= 0.0:
        raise ValueError("need chi >= 0, c_beta > 0, c_reg > 0")
    factor = max(dim - 2, 0) / dim
    if factor == 0.0:
        return 0.0
    return factor * (chi + c_beta) * c_reg ** (1.0 / (dim / 2.0 + 1.0))


def select_q0(
    dim: int,
    mu: float,
    chi: float,
    c_beta: float,
    c_reg_at: Callable[[float], float],
) -> Optional[float]:
    """Smallest grid exponent q0 > N/2 whose damping inequality

        mu > ((q0-1)/q0) * (c_beta + chi) * c_reg_at(q0+1)^(1/(q0+1))

    holds strictly.  The search walks a fixed geometric grid of 10^4 points
    on [N/2 * (1+1e-3), N/2 + 50] from the left and returns the first hit,
    or None when no grid point qualifies.  ``c_reg_at`` maps an exponent
    gamma to the regularity constant at that exponent and must be positive.
    """
    dim = int(dim)
    mu = float(mu)
    if dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    lo = dim / 2.0 * _Q0_GRID_LIFT
    hi = dim / 2.0 + _Q0_GRID_SPAN
    ratio = (hi / lo) ** (1.0 / (_Q0_GRID_POINTS - 1))
    q = lo
    for _ in range(_Q0_GRID_POINTS):
        c = float(c_reg_at(q + 1.0))
        if not c > 0.0:
            raise ValueError(f"c_reg_at({q + 1.0}) = {c} is not positive")
        if mu > (q - 1.0) / q * (float(c_beta) + float(chi)) * c ** (1.0 / (q + 1.0)):
            return q
        q *= ratio
    return None


def threshold_report(
    dim: int,
    chi: float,
    c_beta: float,
    c_reg: float,
    mu: Optional[float] = None,
    c_reg_at: Optional[Callable[[float], float]] = None,
) -> ThresholdReport:
    """Assemble mu_star and, when a damping strength is supplied, the q0
    search result into one record.  ``c_reg_at`` defaults to the constant
    function gamma -> c_reg."""
    ms = mu_star(dim, chi, c_beta, c_reg)
    q0 = None
    if mu is not None and mu > 0.0:
        reg = c_reg_at if c_reg_at is not None else (lambda gamma: c_reg)
        q0 = select_q0(dim, mu, chi, c_beta, reg)
    return ThresholdReport(
        dim=int(dim),
        chi=float(chi),
        c_beta=float(c_beta),
        c_reg=float(c_reg),
        mu_star=ms,
        mu=None if mu is None else float(mu),
        q0=q0,
    )


# --- interpolation exponent ------------------------------------------------


def gn_exponent(p: float, q0: float, dim: int) -> float:
    """Interpolation exponent of the L^p bootstrap step,

        mu1 = p * (N/(2 q0) - N/(2 (q0/(q0-1)) p)) / (1 - N/2 + N p /(2 q0)),

    which simplifies to N (p - q0 + 1) / (N p + 2 q0 - N q0) and lies in
    (0, 1) whenever q0 > N/2 and p > q0 - 1.
    """
    p = float(p)
    q0 = float(q0)
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")
    if not q0 > dim / 2.0:
        raise ValueError(f"need q0 > N/2 = {dim / 2.0}, got q0 = {q0}")
    if not q0 > 1.0:
        raise ValueError(f"need q0 > 1 for the conjugate exponent, got {q0}")
    if not p > q0 - 1.0:
        raise ValueError(f"need p > q0 - 1 = {q0 - 1.0}, got p = {p}")
    n = float(dim)
    mu1 = p * (n / (2.0 * q0) - n / (2.0 * (q0 / (q0 - 1.0)) * p)) / (
        1.0 - n / 2.0 + n * p / (2.0 * q0)
    )
    if not 0.0 < mu1 < 1.0:
        raise ValueError(f"interpolation exponent {mu1} left (0, 1)")
    return mu1


# --- sup-norm iteration -----------------------------------------------------


def moser_sup_bound(m0: float, lam: float, i_max: int) -> MoserTrace:
    """Level bounds of the sup-norm iteration and their stabilized roots.

    Level i controls the L^(2^i) mass via

        M_i = lam^(i + i(i-1)/2) * m0^(2^i),

    equivalently log M_i = T_i log lam + 2^i log m0 with the triangular
    exponent T_i = i (i+1)/2.  The trace is built by the level-to-level
    recursion T_i = T_{i-1} + i with the m0 exponent doubling, and each
    level is cross-checked against the closed form evaluated directly.
    Everything runs in log space because the raw bounds overflow float64
    almost immediately; only the roots M_i^(1/2^i) = lam^(T_i/2^i) * m0
    stay O(1), and their supremum over i <= i_max is the sup-norm bound
    the iteration produces.

    T_i / 2^i peaks at i in {2, 3} (both give 3/4) and decays to 0, so the
    supremum is attained early and the bound is finite uniformly in i.
    """
    m0 = float(m0)
    lam = float(lam)
    i_max = int(i_max)
    if not m0 >= 1.0:
        raise ValueError(f"m0 must be >= 1, got {m0}")
    if not lam > 1.0:
        raise ValueError(f"lam must exceed 1, got {lam}")
    if i_max < 1:
        raise ValueError(f"i_max must be >= 1, got {i_max}")
    log_lam = math.log(lam)
    log_m0 = math.log(m0)
    levels = []
    tri = 0.0        # T_i, advanced as T_i = T_{i-1} + i
    p = 1.0          # 2^i, exact in float64 for i <= 1023
    sup_root = 0.0
    for i in range(1, i_max + 1):
        tri += i
        p *= 2.0
        log_bound = tri * log_lam + p * log_m0
        closed = (i + i * (i - 1) / 2.0) * log_lam + 2.0 ** i * log_m0
        if abs(log_bound - closed) > 1e-10 * max(1.0, abs(closed)):
            raise ArithmeticError(
                f"iteration bound drifted from the closed form at level {i}"
            )
        root = math.exp(log_bound / p)
        sup_root = max(sup_root, root)
        levels.append(MoserLevel(i=i, p=p, log_bound=log_bound, root=root))
    return MoserTrace(m0=m0, lam=lam, levels=tuple(levels), sup_root=sup_root)
