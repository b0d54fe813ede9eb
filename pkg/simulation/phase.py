"""
BD-RIS response design on the unitary manifold.

For a fixed ST power the SINR surrogate ``f(Φ) = |hΦ|² P_s / (σ² + |f|²Q_p)``
is pushed up along the tangent-space projection of its Euclidean gradient,
with Armijo backtracking and an SVD (polar factor) retraction back onto
ΦΦᴴ = I. The interference constraint enters through a multiplier μ.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .exceptions import DegenerateRetractionError, DimensionMismatchError, InvalidParameterError
from .metrics import RisState, interference_denominator, response_gain
from .schemas import Architecture, GainMode, LinkBudget, ManifoldStepConfig

logger = logging.getLogger(__name__)

LN2 = math.log(2)
# Projected gradients below this fraction of the Euclidean one count as stationary.
STATIONARY_RTOL = 1e-12
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class PhaseIterate:
    index: int
    objective: float
    violation: float
    step: float
    mu: float


@dataclass
class PhaseTrace:
    iterates: list[PhaseIterate] = field(default_factory=list)
    converged: bool = False
    final_delta: float = math.inf
    mu_final: float = 0.0

    @property
    def objective_values(self) -> list[float]:
        return [it.objective for it in self.iterates]


# ─── Objective and gradient ───────────────────────────────────────────────


def _gain_gradient(v: np.ndarray, Phi: np.ndarray, a: np.ndarray) -> np.ndarray:
    # d|vᴴΦa|² / dRe Φ + j d|vᴴΦa|² / dIm Φ
    return 2 * np.vdot(v, Phi @ a) * np.outer(v, a.conj())


@dataclass(frozen=True)
class _Surrogate:
    """
    Power-normalized Lagrangian ``|hΦ|²/D − μ|gΦ|²``.

    The Lagrangian equals ``P_s·value + μ·I_th``, so ascent on this function
    follows the same path for every P_s > 0 and stays meaningful at P_s = 0.
    """

    h: np.ndarray
    g: np.ndarray
    a: np.ndarray
    gmode: GainMode
    inv_denom: float

    def value(self, Phi: np.ndarray, mu: float) -> float:
        h_gain = response_gain(self.h, Phi, self.a, self.gmode)
        if mu == 0:
            return h_gain * self.inv_denom
        return h_gain * self.inv_denom - mu * response_gain(self.g, Phi, self.a, self.gmode)

    def gradient(self, Phi: np.ndarray, mu: float) -> np.ndarray:
        if self.gmode is GainMode.FEED_VECTOR:
            grad = self.inv_denom * _gain_gradient(self.h, Phi, self.a)
            if mu:
                grad = grad - mu * _gain_gradient(self.g, Phi, self.a)
            return grad
        # literal expression: (2/ln2)·h̄hᵀΦ − 2μ·ḡgᵀΦ, per unit power
        grad = (2 / LN2) * np.outer(self.h.conj(), self.h) @ Phi
        if mu:
            grad = grad - 2 * mu * np.outer(self.g.conj(), self.g) @ Phi
        return grad


def _surrogate(h, g, f, ris: RisState, gmode: GainMode, budget: LinkBudget) -> _Surrogate:
    h = np.asarray(h, dtype=complex).reshape(-1)
    g = np.asarray(g, dtype=complex).reshape(-1)
    if h.size != ris.M or g.size != ris.M:
        raise DimensionMismatchError(f"channels of length {h.size}/{g.size} for a {ris.M}-element RIS")
    return _Surrogate(h, g, ris.a, GainMode(gmode), 1 / interference_denominator(f, budget))


def _check_power(P_s: float, mu: float) -> None:
    if P_s < 0:
        raise InvalidParameterError(f"transmit power must be >= 0, got {P_s}")
    if mu < 0:
        raise InvalidParameterError(f"multiplier must be >= 0, got {mu}")


def lagrangian_value(h, g, f, ris: RisState, gmode: GainMode, P_s: float, mu: float, budget: LinkBudget) -> float:
    """``f(Φ) − μ(|gΦ|² P_s − I_th)`` with ``f(Φ) = |hΦ|² P_s / (σ² + |f|²Q_p)``."""
    _check_power(P_s, mu)
    objective = _surrogate(h, g, f, ris, gmode, budget)
    h_term = response_gain(objective.h, ris.Phi, ris.a, objective.gmode) * P_s * objective.inv_denom
    violation = response_gain(objective.g, ris.Phi, ris.a, objective.gmode) * P_s - budget.I_th
    return h_term - mu * violation


def euclidean_gradient(h, g, f, ris: RisState, gmode: GainMode, P_s: float, mu: float, budget: LinkBudget) -> np.ndarray:
    """
    Euclidean gradient of the Lagrangian in real coordinates (∂/∂Re Φ + j·∂/∂Im Φ).

    FeedVector: ``2P_s/D·(hᴴΦa)·h aᴴ − 2μP_s·(gᴴΦa)·g aᴴ``.
    PaperLiteralNorm: ``(2P_s/ln2)·h̄hᵀΦ − 2μP_s·ḡgᵀΦ`` as written for the row-norm objective.
    """
    _check_power(P_s, mu)
    return P_s * _surrogate(h, g, f, ris, gmode, budget).gradient(ris.Phi, mu)


# ─── Manifold operations ──────────────────────────────────────────────────


def tangent_project(Phi: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``G − Φ(ΦᴴG + GᴴΦ)/2``: drop the normal component at Φ."""
    PhiHG = Phi.conj().T @ G
    return G - Phi @ (PhiHG + PhiHG.conj().T) / 2


def _svd(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return linalg.svd(X, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        # gesdd can fail to converge on near-unitary inputs
        logger.debug("gesdd did not converge on a %dx%d matrix; retrying with gesvd.", *X.shape)
    try:
        return linalg.svd(X, lapack_driver="gesvd")
    except np.linalg.LinAlgError as exc:
        raise DegenerateRetractionError(f"SVD did not converge: {exc}") from exc


def retract_svd(X: np.ndarray) -> np.ndarray:
    """Closest unitary matrix to X in Frobenius norm, ``UVᴴ`` from ``X = UΣVᴴ``."""
    X = np.asarray(X, dtype=complex)
    if not np.all(np.isfinite(X)):
        raise DegenerateRetractionError("cannot retract a matrix with non-finite entries")
    U, s, Vh = _svd(X)
    if s.size == 0 or s[-1] <= RANK_RTOL * s[0]:
        raise DegenerateRetractionError("cannot retract a rank-deficient matrix onto the unitary group")
    return U @ Vh


# ─── Ascent loop ──────────────────────────────────────────────────────────


def riemannian_ascend(
    h,
    g,
    f,
    ris0: RisState,
    gmode: GainMode,
    P_s: float,
    budget: LinkBudget,
    cfg: ManifoldStepConfig,
) -> tuple[RisState, PhaseTrace]:
    """
    Projected-gradient ascent of the Lagrangian over unitary Φ.

    Each iteration moves along the projected gradient with Armijo backtracking
    (first trial of Frobenius length ``eta0``), retracts with the SVD, then
    updates ``μ ← [μ + ρ(|gΦ|²P_s − I_th)]⁺``. Stops once
    ``‖Φ_{k+1} − Φ_k‖_F < ε`` (returning Φ_k), when no ascent step is
    accepted, or after ``max_inner`` iterations.
    """
    _check_power(P_s, cfg.mu0)
    objective = _surrogate(h, g, f, ris0, gmode, budget)
    g_vec, a = objective.g, ris0.a

    def lagrangian(Phi, mu):
        return P_s * objective.value(Phi, mu) + mu * budget.I_th

    def violation(Phi):
        return response_gain(g_vec, Phi, a, objective.gmode) * P_s - budget.I_th

    Phi = np.array(ris0.Phi, dtype=complex)
    mu = cfg.mu0
    value = objective.value(Phi, mu)
    trace = PhaseTrace(mu_final=mu)
    trace.iterates.append(PhaseIterate(0, lagrangian(Phi, mu), violation(Phi), 0.0, mu))
    best_Phi, best_objective = Phi, trace.iterates[0].objective

    for k in range(1, cfg.max_inner + 1):
        grad = objective.gradient(Phi, mu)
        direction = tangent_project(Phi, grad)
        norm = float(np.linalg.norm(direction))
        if norm <= STATIONARY_RTOL * max(1.0, float(np.linalg.norm(grad))):
            trace.converged, trace.final_delta = True, 0.0
            break

        eta = cfg.eta0 / norm
        candidate = None
        for _ in range(cfg.max_backtracks):
            trial = retract_svd(Phi + eta * direction)
            trial_value = objective.value(trial, mu)
            if trial_value >= value + cfg.armijo_slope * eta * norm**2:
                candidate = trial
                break
            eta *= cfg.armijo_shrink
        if candidate is None:
            trace.converged, trace.final_delta = True, 0.0
            break

        delta = float(np.linalg.norm(candidate - Phi))
        if delta < cfg.epsilon:
            trace.converged, trace.final_delta = True, delta
            break

        Phi = candidate
        step_objective = lagrangian(Phi, mu)
        step_violation = violation(Phi)
        trace.iterates.append(PhaseIterate(k, step_objective, step_violation, eta * norm, mu))
        if step_objective >= best_objective:
            best_Phi, best_objective = Phi, step_objective
        trace.final_delta = delta

        if cfg.rho:
            mu = max(0.0, mu + cfg.rho * step_violation)
        value = objective.value(Phi, mu)
    else:
        logger.warning(
            "Phase step stopped after %d iterations without convergence (last delta %.3e).",
            cfg.max_inner,
            trace.final_delta,
        )
        Phi = best_Phi

    trace.mu_final = mu
    return RisState(Architecture.BD, Phi, a), trace


def dris_baseline(h, a) -> RisState:
    """Co-phasing diagonal ``Φ_mm = exp(−j·arg(conj(h_m)·a_m))``; zero products get phase 0."""
    h = np.asarray(h, dtype=complex).reshape(-1)
    a = np.asarray(a, dtype=complex).reshape(-1)
    if h.size != a.size:
        raise DimensionMismatchError(f"h has {h.size} entries but the feed has {a.size}")
    phases = np.angle(h.conj() * a)
    return RisState(Architecture.D, np.diag(np.exp(-1j * phases)), a)
