"""Arrivals, queue dynamics, and capacity-region membership."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidRate, StateSpaceTooLarge
from .graph import ENUMERATION_CAP, InterferenceGraph, Schedule, check_schedule
from .graph import maximal_independent_masks

# Below this size the margin LP is solved in exact rational arithmetic.
EXACT_LP_CAP = 6


def update_queues(
    q: Sequence[int], schedule: Schedule, arrivals: Sequence[int]
) -> np.ndarray:
    """One-slot queue update: scheduled departure first, then arrival.

    A scheduled empty queue transmits a dummy packet and loses nothing.
    """
    q = np.asarray(q, dtype=np.int64)
    a = np.asarray(arrivals, dtype=np.int64)
    if q.shape != a.shape:
        raise ValueError("queue and arrival vectors must have equal length")
    if np.any((a != 0) & (a != 1)):
        raise ValueError("arrivals must be 0/1")
    served = np.zeros_like(q)
    for i in schedule.nodes():
        served[i] = 1
    return q - served * (q > 0) + a


def sample_arrivals(lam: Sequence[float], coins: Sequence[float]) -> np.ndarray:
    """Bernoulli(lam_i) indicators from one slot's arrival uniforms."""
    lam = _check_rates(lam)
    u = np.asarray(coins, dtype=np.float64)
    if u.shape != lam.shape:
        raise ValueError("need one coin per node")
    return (u < lam).astype(np.int64)


def _check_rates(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0):
        raise InvalidRate("arrival rates must be >= 0")
    if np.any(lam > 1):
        raise InvalidRate("Bernoulli rates cannot exceed 1")
    return lam


def capacity_margin(g: InterferenceGraph, lam: Sequence[float]) -> float | Fraction:
    """Largest t with t*lam inside the schedule-mixture capacity region.

    The region is the down-closed convex hull of I(G): rates y with
    y <= sum_s alpha_s * s for a subprobability mixture alpha over schedules.
    Mass only ever helps on inclusion-maximal schedules, so the LP runs over
    those.  Returns +inf for the zero rate vector, an exact Fraction for
    n <= EXACT_LP_CAP, and a double-precision value (1e-9 feasibility
    tolerance) otherwise.  t > 1 means lam is interior.
    """
    lam = _check_rates(lam)
    if lam.shape != (g.n,):
        raise InvalidRate(f"need {g.n} rates, got {lam.shape}")
    if not lam.any():
        return math.inf
    if g.n > ENUMERATION_CAP:
        raise StateSpaceTooLarge(
            f"capacity margin enumerates I(G); needs n <= {ENUMERATION_CAP}"
        )
    masks = maximal_independent_masks(g)
    if g.n <= EXACT_LP_CAP:
        return _margin_exact(g.n, masks, lam)
    return _margin_lp(g.n, masks, lam)


def _margin_lp(n: int, masks: list[int], lam: np.ndarray) -> float:
    # variables x = (t, alpha_0..alpha_{m-1}); maximize t
    m = len(masks)
    c = np.zeros(1 + m)
    c[0] = -1.0
    a_ub = np.zeros((n + 1, 1 + m))
    b_ub = np.zeros(n + 1)
    for i in range(n):
        a_ub[i, 0] = lam[i]
        for k, mask in enumerate(masks):
            a_ub[i, 1 + k] = -((mask >> i) & 1)
    a_ub[n, 1:] = 1.0
    b_ub[n] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"capacity LP failed: {res.message}")
    return float(res.x[0])


def _margin_exact(n: int, masks: list[int], lam: np.ndarray) -> Fraction:
    import sympy
    from sympy.solvers.simplex import lpmax

    t = sympy.Symbol("t")
    alphas = sympy.symbols(f"a0:{len(masks)}")
    rates = [sympy.Rational(Fraction(float(x))) for x in lam]
    constraints = [t >= 0] + [a >= 0 for a in alphas]
    for i in range(n):
        served = sum(a for a, mask in zip(alphas, masks) if (mask >> i) & 1)
        constraints.append(rates[i] * t - served <= 0)
    constraints.append(sum(alphas) <= 1)
    value, _ = lpmax(t, constraints)
    return Fraction(int(value.p), int(value.q))


def service_vector(g: InterferenceGraph, schedule: Schedule) -> np.ndarray:
    """0/1 departure-opportunity vector of a schedule."""
    check_schedule(g, schedule)
    out = np.zeros(g.n, dtype=np.int64)
    for i in schedule.nodes():
        out[i] = 1
    return out
