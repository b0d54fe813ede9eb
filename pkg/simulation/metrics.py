"""
Link-level quantities through the RIS: effective gains, SINR, spectral
efficiency and interference at the primary user.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError
from .schemas import Architecture, GainMode, LinkBudget

UNITARY_TOL = 1e-8
UNIT_TOL = 1e-12


def watt_to_dbm(watt: float) -> float:
    if watt <= 0:
        raise InvalidParameterError(f"power must be positive to express in dBm, got {watt}")
    return 10 * math.log10(watt) + 30


def unitarity_error(Phi: np.ndarray) -> float:
    """``‖ΦΦᴴ − I‖_F``."""
    return float(np.linalg.norm(Phi @ Phi.conj().T - np.eye(Phi.shape[0])))


@dataclass(frozen=True)
class RisState:
    """
    RIS configuration: architecture, M×M response Φ and the unit-norm feed a.

    BD states must be unitary; D states must be diagonal with unit-modulus entries.
    """

    mode: Architecture
    Phi: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        Phi = np.asarray(self.Phi, dtype=complex)
        a = np.asarray(self.a, dtype=complex).reshape(-1)
        M = a.size
        if Phi.shape != (M, M):
            raise DimensionMismatchError(f"Phi has shape {Phi.shape}, expected ({M}, {M})")
        if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
            raise InvalidParameterError("feed vector must have unit norm")
        mode = Architecture(self.mode)
        if mode is Architecture.BD:
            err = unitarity_error(Phi)
            if err >= UNITARY_TOL:
                raise InvalidParameterError(f"BD response is not unitary (error {err:.3e})")
        else:
            diag = np.diag(Phi)
            if np.any(np.abs(Phi - np.diag(diag)) > 0):
                raise InvalidParameterError("D response must be diagonal")
            if np.any(np.abs(np.abs(diag) - 1.0) > UNIT_TOL):
                raise InvalidParameterError("D response entries must have unit modulus")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "a", a)

    @property
    def M(self) -> int:
        return self.a.size


def default_feed(M: int) -> np.ndarray:
    return np.full(M, 1 / math.sqrt(M), dtype=complex)


def identity_ris(M: int, a: np.ndarray | None = None) -> RisState:
    """The Φ₀ = I_M starting point of the BD optimizer."""
    return RisState(Architecture.BD, np.eye(M, dtype=complex), default_feed(M) if a is None else a)


def _check_length(v: np.ndarray, M: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != M:
        raise DimensionMismatchError(f"channel vector has {v.size} entries, RIS has {M} elements")
    return v


def response_gain(v: np.ndarray, Phi: np.ndarray, a: np.ndarray, gmode: GainMode) -> float:
    """Effective gain for a raw response matrix (no RisState validation)."""
    if gmode is GainMode.FEED_VECTOR:
        return float(abs(np.vdot(v, Phi @ a)) ** 2)
    return float(np.linalg.norm(v @ Phi) ** 2)


def effective_gain(v: np.ndarray, ris: RisState, gmode: GainMode) -> float:
    """
    ``|vᴴ Φ a|²`` in FeedVector mode, ``‖vᵀ Φ‖²`` in PaperLiteralNorm mode.

    The literal norm is invariant under any unitary Φ, which is why the feed
    vector reading is the operational default.
    """
    v = _check_length(v, ris.M)
    return response_gain(v, ris.Phi, ris.a, GainMode(gmode))


def interference_denominator(f: complex, budget: LinkBudget) -> float:
    """``σ² + |f|² Q_p``."""
    return budget.sigma2 + abs(f) ** 2 * budget.Q_p


def sinr(h_gain: float, P_s: float, f: complex, budget: LinkBudget) -> float:
    if P_s < 0:
        raise InvalidParameterError(f"transmit power must be >= 0, got {P_s}")
    return h_gain * P_s / interference_denominator(f, budget)


def spectral_efficiency(gamma: float) -> float:
    """``log₂(1 + γ)`` in bits/s/Hz."""
    if gamma < 0:
        raise InvalidParameterError(f"SINR must be >= 0, got {gamma}")
    return math.log1p(gamma) / math.log(2)


def pu_interference(g: np.ndarray, ris: RisState, gmode: GainMode, P_s: float) -> float:
    if P_s < 0:
        raise InvalidParameterError(f"transmit power must be >= 0, got {P_s}")
    return effective_gain(g, ris, gmode) * P_s
