"""
Rician channel generation for the ST→SU, ST→PU and PT→SU links.

Every draw takes an explicit ``numpy.random.Generator``; trial streams are
derived from (master seed, trial index, link tag) so trials can run in any
order or process and still reproduce bit-for-bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError
from .schemas import GeometryParams, RicianParams

# Rician factors at or above this are treated as pure LoS.
K_PURE_LOS = 1e12

# Spawn-key codes of the three links; part of the seed contract.
LINK_CODE = {"h": 0, "g": 1, "f": 2}


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the three links: h (ST→SU), g (ST→PU), f (PT→SU)."""

    h: np.ndarray
    g: np.ndarray
    f: complex

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex).reshape(-1)
        g = np.asarray(self.g, dtype=complex).reshape(-1)
        if h.shape != g.shape:
            raise DimensionMismatchError(f"h has {h.size} entries but g has {g.size}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(g)) and np.isfinite(self.f)):
            raise InvalidParameterError("channel entries must be finite")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", complex(self.f))

    @property
    def M(self) -> int:
        return self.h.size


@dataclass(frozen=True)
class Scenario:
    """Everything needed to draw one trial's channels."""

    Mx: int
    My: int
    f_c: float
    q: float
    links: dict[str, RicianParams]

    @property
    def M(self) -> int:
        return self.Mx * self.My


def delta_of(f_c: float, q: float) -> float:
    """Phase increment between adjacent elements, ``2π f_c q / c``."""
    if not (math.isfinite(f_c) and f_c > 0):
        raise InvalidParameterError(f"carrier frequency must be positive, got {f_c}")
    if not (math.isfinite(q) and q > 0):
        raise InvalidParameterError(f"element spacing must be positive, got {q}")
    return 2 * math.pi * f_c * q / GeometryParams.SPEED_OF_LIGHT


def los_steering(geom: GeometryParams) -> np.ndarray:
    """
    Kronecker LoS steering vector of an Mx×My planar array.

    x-axis ramp ``exp(-j δ sinθ cosφ m)`` for m < Mx, y-axis ramp
    ``exp(-j δ sinθ sinφ n)`` for n < My; the result has Mx·My unit-modulus entries.
    """
    if not (math.isfinite(geom.theta) and math.isfinite(geom.varphi)):
        raise InvalidParameterError("arrival angles must be finite")
    spatial = geom.delta * math.sin(geom.theta)
    ramp_x = np.exp(-1j * spatial * math.cos(geom.varphi) * np.arange(geom.Mx))
    ramp_y = np.exp(-1j * spatial * math.sin(geom.varphi) * np.arange(geom.My))
    return np.kron(ramp_x, ramp_y)


def _los_nlos_weights(K: float) -> tuple[float, float]:
    if math.isinf(K) or K >= K_PURE_LOS:
        return 1.0, 0.0
    return math.sqrt(K / (K + 1)), math.sqrt(1 / (K + 1))


def _complex_gaussian(stream: np.random.Generator, shape) -> np.ndarray:
    # unit variance: real and imaginary parts each carry 1/2
    return (stream.standard_normal(shape) + 1j * stream.standard_normal(shape)) / math.sqrt(2)


def rician_draws(
    geom: GeometryParams, ric: RicianParams, stream: np.random.Generator, count: int
) -> np.ndarray:
    """``count`` independent Rician vectors sharing one LoS component, shape (count, M)."""
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    los_w, nlos_w = _los_nlos_weights(ric.K)
    h_los = los_steering(geom)
    h_nlos = _complex_gaussian(stream, (count, geom.M))
    if nlos_w == 0.0:
        h_nlos = np.zeros_like(h_nlos)
    return ric.scale * (los_w * h_los[np.newaxis, :] + nlos_w * h_nlos)


def rician_draw(geom: GeometryParams, ric: RicianParams, stream: np.random.Generator) -> np.ndarray:
    """``sqrt(ĥ/d²)·(sqrt(K/(K+1))·h_LoS + sqrt(1/(K+1))·h_NLoS)`` for one array."""
    return rician_draws(geom, ric, stream, 1)[0]


def scalar_rician_draw(ric: RicianParams, stream: np.random.Generator) -> complex:
    """Single-antenna Rician coefficient (LoS component = 1)."""
    los_w, nlos_w = _los_nlos_weights(ric.K)
    nlos = complex(_complex_gaussian(stream, ()))
    if nlos_w == 0.0:
        nlos = 0j
    return complex(ric.scale * (los_w + nlos_w * nlos))


def derive_stream(master_seed: int, trial_index: int, link: str) -> np.random.Generator:
    """
    Per-trial, per-link generator.

    Mixing is numpy's SeedSequence hash of ``entropy=master_seed`` with
    ``spawn_key=(trial_index, LINK_CODE[link])``; changing the number of trials
    never changes the streams of existing trial indices.
    """
    if link not in LINK_CODE:
        raise InvalidParameterError(f"unknown link tag {link!r}")
    if trial_index < 0:
        raise InvalidParameterError(f"trial index must be >= 0, got {trial_index}")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index, LINK_CODE[link]))
    return np.random.Generator(np.random.PCG64(seq))


def draw_angles(stream: np.random.Generator) -> tuple[float, float]:
    """Elevation in [0, π/2], azimuth in [0, 2π)."""
    theta = float(stream.uniform(0.0, math.pi / 2))
    varphi = float(stream.uniform(0.0, 2 * math.pi))
    return theta, varphi


def element_grid_shape(M: int) -> tuple[int, int]:
    """Near-square (Mx, My) with Mx the largest divisor of M not above sqrt(M)."""
    if M < 1:
        raise InvalidParameterError(f"element count must be >= 1, got {M}")
    Mx = max(d for d in range(1, math.isqrt(M) + 1) if M % d == 0)
    return Mx, M // Mx


def draw_channel(scenario: Scenario, master_seed: int, trial_index: int) -> ChannelRealization:
    """Draw h, g and f of one trial; each link owns its angles and fading stream."""
    vectors = {}
    for tag in ("h", "g"):
        stream = derive_stream(master_seed, trial_index, tag)
        theta, varphi = draw_angles(stream)
        geom = GeometryParams(
            Mx=scenario.Mx, My=scenario.My, theta=theta, varphi=varphi, f_c=scenario.f_c, q=scenario.q
        )
        vectors[tag] = rician_draw(geom, scenario.links[tag], stream)
    f = scalar_rician_draw(scenario.links["f"], derive_stream(master_seed, trial_index, "f"))
    return ChannelRealization(h=vectors["h"], g=vectors["g"], f=f)
