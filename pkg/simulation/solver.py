"""
Alternating optimization of ST power and RIS response for one channel draw.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .metrics import RisState, effective_gain, identity_ris, pu_interference, sinr, spectral_efficiency
from .phase import PhaseTrace, dris_baseline, riemannian_ascend
from .power import PowerSolution, allocate_power
from .schemas import Architecture, LinkBudget, SolverOptions

logger = logging.getLogger(__name__)

# Outer updates that lower the spectral efficiency by more than this are rejected.
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class SolverReport:
    P_s_star: float
    Phi_star: RisState
    se_trace: list[float]
    interference_final: float
    outer_iters: int
    converged: bool
    power_trace: list[PowerSolution] = field(default_factory=list)
    phase_traces: list[PhaseTrace] = field(default_factory=list)

    @property
    def se_bits(self) -> float:
        return self.se_trace[-1]


def _power_step(
    chan: ChannelRealization, ris: RisState, budget: LinkBudget, opts: SolverOptions
) -> tuple[PowerSolution, float]:
    h_gain = effective_gain(chan.h, ris, opts.gmode)
    g_gain = effective_gain(chan.g, ris, opts.gmode)
    power = allocate_power(opts.prule, h_gain, g_gain, chan.f, budget)
    return power, spectral_efficiency(sinr(h_gain, power.P_s, chan.f, budget))


def _report(chan, ris, power, se_trace, outer_iters, converged, opts, powers, phases) -> SolverReport:
    return SolverReport(
        P_s_star=power.P_s,
        Phi_star=ris,
        se_trace=se_trace,
        interference_final=pu_interference(chan.g, ris, opts.gmode, power.P_s),
        outer_iters=outer_iters,
        converged=converged,
        power_trace=powers,
        phase_traces=phases,
    )


def solve(chan: ChannelRealization, budget: LinkBudget, opts: SolverOptions) -> SolverReport:
    """
    Alternate power and phase steps starting from Φ₀ = I.

    Each outer round runs the manifold ascent at the current power, then
    re-tightens the power on the new response. The loop ends when the
    spectral efficiency moves by less than ``outer_tol``, when the monotone
    guard rejects a round, or after ``max_outer`` rounds.
    """
    ris = identity_ris(chan.M)
    power, se = _power_step(chan, ris, budget, opts)
    powers, phases = [power], []

    if not np.any(chan.h):
        return _report(chan, ris, power, [0.0], 0, True, opts, powers, phases)

    se_trace = [se]
    converged = False
    outer_iters = 0
    for outer_iters in range(1, opts.max_outer + 1):
        candidate, phase_trace = riemannian_ascend(
            chan.h, chan.g, chan.f, ris, opts.gmode, power.P_s, budget, opts.step
        )
        cand_power, cand_se = _power_step(chan, candidate, budget, opts)

        if opts.monotone_guard and cand_se < se - MONOTONE_SLACK:
            logger.debug("Outer round %d lowered SE from %.6g to %.6g; keeping previous point.", outer_iters, se, cand_se)
            converged = True
            break

        previous = se
        ris, power, se = candidate, cand_power, cand_se
        se_trace.append(se)
        powers.append(power)
        phases.append(phase_trace)
        if abs(se - previous) < opts.outer_tol:
            converged = True
            break
    else:
        logger.warning("Alternating solver hit max_outer=%d without converging (SE %.6g).", opts.max_outer, se)

    return _report(chan, ris, power, se_trace, outer_iters, converged, opts, powers, phases)


def solve_dris(chan: ChannelRealization, budget: LinkBudget, opts: SolverOptions) -> SolverReport:
    """Diagonal RIS: closed-form co-phasing followed by a single power step."""
    ris = dris_baseline(chan.h, identity_ris(chan.M).a)
    power, se = _power_step(chan, ris, budget, opts)
    return _report(chan, ris, power, [se], 1, True, opts, [power], [])


def solve_for_architecture(
    architecture: Architecture, chan: ChannelRealization, budget: LinkBudget, opts: SolverOptions
) -> SolverReport:
    if Architecture(architecture) is Architecture.BD:
        return solve(chan, budget, opts)
    return solve_dris(chan, budget, opts)
