"""
ST transmit power for a fixed RIS response.

Two rules: the water-filling closed form derived from the KKT conditions
(``[1/λ − (σ² + |f|²Q_p)/|hΦ|²]⁺`` capped at P_max, λ = |gΦ|²/I_th) and the
exact maximizer, which sits on the tighter of the interference and power
bounds because the rate increases with P_s. A grid search and a
second-difference concavity probe back both up in tests.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError
from .metrics import interference_denominator
from .schemas import Binding, LinkBudget, PowerRule

LN2 = math.log(2)


@dataclass(frozen=True)
class PowerSolution:
    """Optimal ST power with the multipliers of the interference / nonnegativity constraints."""

    P_s: float
    lam: float
    mu: float
    binding: Binding


def lambda_opt(g_gain: float, I_th: float) -> float:
    """Interference multiplier ``|gΦ|² / I_th``."""
    if not I_th > 0:
        raise InvalidParameterError("interference threshold must be > 0 for the multiplier to exist")
    return g_gain / I_th


def power_paper_kkt(h_gain: float, g_gain: float, f: complex, budget: LinkBudget) -> PowerSolution:
    """Water-filling rule ``min([1/λ − D/h_gain]⁺, P_max)``."""
    if h_gain <= 0:
        return PowerSolution(P_s=0.0, lam=0.0, mu=0.0, binding=Binding.INTERIOR)
    denom = interference_denominator(f, budget)
    if g_gain == 0:
        return PowerSolution(P_s=budget.P_max, lam=0.0, mu=0.0, binding=Binding.POWER_CAP)
    if budget.I_th == 0:
        mu = max(0.0, h_gain / (LN2 * denom))
        return PowerSolution(P_s=0.0, lam=math.inf, mu=mu, binding=Binding.INTERFERENCE_BOUND)

    lam = lambda_opt(g_gain, budget.I_th)
    water = 1 / lam - denom / h_gain
    if water >= budget.P_max:
        return PowerSolution(P_s=budget.P_max, lam=lam, mu=0.0, binding=Binding.POWER_CAP)
    if water <= 0:
        # stationarity residual at P_s = 0 becomes the nonnegativity multiplier
        mu = max(0.0, h_gain / (LN2 * denom) - lam * g_gain)
        return PowerSolution(P_s=0.0, lam=lam, mu=mu, binding=Binding.INTERIOR)
    return PowerSolution(P_s=water, lam=lam, mu=0.0, binding=Binding.INTERIOR)


def power_boundary(h_gain: float, g_gain: float, budget: LinkBudget, f: complex = 0j) -> PowerSolution:
    """
    Exact maximizer ``min(P_max, I_th/g_gain)``.

    ``f`` only feeds the reported multiplier (stationarity on the interference
    bound); the power itself does not depend on it.
    """
    cap = math.inf if g_gain == 0 else budget.I_th / g_gain
    if cap >= budget.P_max:
        return PowerSolution(P_s=budget.P_max, lam=0.0, mu=0.0, binding=Binding.POWER_CAP)

    P_s = cap
    denom = interference_denominator(f, budget)
    lam = h_gain / (LN2 * (h_gain * P_s + denom) * g_gain)
    return PowerSolution(P_s=P_s, lam=lam, mu=0.0, binding=Binding.INTERFERENCE_BOUND)


def allocate_power(
    rule: PowerRule, h_gain: float, g_gain: float, f: complex, budget: LinkBudget
) -> PowerSolution:
    if PowerRule(rule) is PowerRule.PAPER_KKT:
        return power_paper_kkt(h_gain, g_gain, f, budget)
    return power_boundary(h_gain, g_gain, budget, f)


def _rate_curve(h_gain: float, f: complex, budget: LinkBudget, powers: np.ndarray) -> np.ndarray:
    return np.log1p(h_gain * powers / interference_denominator(f, budget)) / LN2


def power_oracle_grid(
    h_gain: float, g_gain: float, f: complex, budget: LinkBudget, grid_points: int
) -> float:
    """Brute-force argmax of the rate over a uniform feasible grid on [0, P_max]."""
    if grid_points < 2:
        raise InvalidParameterError(f"grid needs at least 2 points, got {grid_points}")
    powers = np.linspace(0.0, budget.P_max, grid_points)
    feasible = g_gain * powers <= budget.I_th * (1 + 1e-9)
    if not feasible.any():
        return 0.0
    rates = np.where(feasible, _rate_curve(h_gain, f, budget, powers), -np.inf)
    return float(powers[int(np.argmax(rates))])


def concavity_check(h_gain: float, f: complex, budget: LinkBudget, probe_points: int) -> bool:
    """True iff every centered second difference of the rate in P_s is <= 1e-12."""
    if probe_points < 3:
        raise InvalidParameterError(f"need at least 3 probe points, got {probe_points}")
    powers = np.linspace(0.0, budget.P_max, probe_points)
    rates = _rate_curve(h_gain, f, budget, powers)
    second = rates[2:] - 2 * rates[1:-1] + rates[:-2]
    return bool(np.all(second <= 1e-12))
