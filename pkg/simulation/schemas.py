"""
Parameter models and enums shared by the simulator modules.

Scalar parameter blocks are frozen pydantic models: JSON config files and CLI
overrides go through the same validation. Anything that carries numpy arrays
lives next to the code that produces it as a dataclass.
"""

import math
import sys
from enum import Enum
from typing import ClassVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.constants import speed_of_light

if sys.version_info >= (3, 11):
    from enum import StrEnum
else:  # pragma: no cover - Python 3.10 fallback matching enum.StrEnum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__


class GainMode(StrEnum):
    """How ``|hΦ|²`` is read: scalar feed-vector routing or the literal row norm."""

    FEED_VECTOR = "feed"
    PAPER_LITERAL_NORM = "paper-norm"


class PowerRule(StrEnum):
    PAPER_KKT = "kkt"
    BOUNDARY_OPTIMAL = "boundary"


class Architecture(StrEnum):
    BD = "bd"
    D = "d"


class Binding(StrEnum):
    INTERFERENCE_BOUND = "interference"
    POWER_CAP = "power-cap"
    INTERIOR = "interior"


class SweepKind(StrEnum):
    POWER = "power-sweep"
    ELEMENT = "element-sweep"
    ITH = "ith-sweep"


def dbm_to_watt(dbm: float) -> float:
    return 10 ** ((dbm - 30) / 10)


# inf survives JSON round trips (K = inf is pure LoS)
_FROZEN = ConfigDict(frozen=True, extra="forbid", ser_json_inf_nan="constants")


# ─── Channel geometry ─────────────────────────────────────────────────────


class GeometryParams(BaseModel):
    """Planar array shape, arrival direction and carrier for the LoS steering vector."""

    model_config = _FROZEN

    SPEED_OF_LIGHT: ClassVar[float] = speed_of_light

    Mx: int = Field(ge=1)
    My: int = Field(ge=1)
    theta: float = Field(default=0.0, allow_inf_nan=False)
    varphi: float = Field(default=0.0, allow_inf_nan=False)
    f_c: float = Field(default=2e9, gt=0, allow_inf_nan=False)
    q: float = Field(default=speed_of_light / (2 * 2e9), gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _check_delta(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"element phase increment must be finite and positive, got {self.delta}")
        return self

    @property
    def M(self) -> int:
        return self.Mx * self.My

    @property
    def delta(self) -> float:
        return 2 * math.pi * self.f_c * self.q / self.SPEED_OF_LIGHT


class RicianParams(BaseModel):
    """Rician factor, channel power gain and distance of one link."""

    model_config = _FROZEN

    K: float = Field(default=10.0, ge=0)
    h_hat: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    d: float = Field(default=1.0, gt=0, allow_inf_nan=False)

    @field_validator("K")
    @classmethod
    def _k_not_nan(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("Rician factor must not be NaN")
        return value

    @model_validator(mode="after")
    def _check_scale(self):
        if not math.isfinite(self.scale):
            raise ValueError("large-scale amplitude sqrt(h_hat)/d is not finite")
        return self

    @property
    def scale(self) -> float:
        return math.sqrt(self.h_hat) / self.d


# ─── Link budget and solver knobs ─────────────────────────────────────────


class LinkBudget(BaseModel):
    """Powers in watts: ST cap, PT power, noise power and interference threshold."""

    model_config = _FROZEN

    P_max: float = Field(gt=0, allow_inf_nan=False)
    Q_p: float = Field(gt=0, allow_inf_nan=False)
    sigma2: float = Field(default=1e-9, gt=0, allow_inf_nan=False)
    I_th: float = Field(ge=0, allow_inf_nan=False)


class ManifoldStepConfig(BaseModel):
    model_config = _FROZEN

    eta0: float = Field(default=0.1, gt=0)
    armijo_shrink: float = Field(default=0.5, gt=0, lt=1)
    armijo_slope: float = Field(default=1e-4, gt=0, lt=1)
    max_inner: int = Field(default=500, ge=1)
    max_backtracks: int = Field(default=40, ge=1)
    epsilon: float = Field(default=1e-6, gt=0)
    mu0: float = Field(default=0.0, ge=0)
    rho: float = Field(default=0.0, ge=0)


class SolverOptions(BaseModel):
    model_config = _FROZEN

    gmode: GainMode = GainMode.FEED_VECTOR
    prule: PowerRule = PowerRule.PAPER_KKT
    step: ManifoldStepConfig = Field(default_factory=ManifoldStepConfig)
    outer_tol: float = Field(default=1e-5, gt=0)
    max_outer: int = Field(default=50, ge=1)
    # Reject an outer update that lowers the re-tightened spectral efficiency.
    monotone_guard: bool = True


# ─── Experiment configuration ─────────────────────────────────────────────


class OuterLoopConfig(BaseModel):
    model_config = _FROZEN

    outer_tol: float = Field(default=1e-5, gt=0)
    max_outer: int = Field(default=50, ge=1)
    monotone_guard: bool = True


class FixedParameters(BaseModel):
    """Scenario values held constant across a sweep."""

    model_config = _FROZEN

    P_s_dbm: float = Field(default=30.0, allow_inf_nan=False)
    # Series of power caps for the I_th sweep; defaults to [P_s_dbm].
    P_s_dbm_list: list[float] | None = None
    Q_p_dbm: float = Field(default=40.0, allow_inf_nan=False)
    M: int = Field(default=32, ge=1)
    Mx: int = Field(default=4, ge=1)
    My: int = Field(default=8, ge=1)
    K: float = Field(default=10.0, ge=0)
    h_hat: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    distance_m: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    link_overrides: dict[str, RicianParams] = Field(default_factory=dict)
    I_th_list: list[float] = Field(default_factory=lambda: [0.01, 0.1], min_length=1)
    sigma2_w: float = Field(default=1e-9, gt=0, allow_inf_nan=False)
    gmode: GainMode = GainMode.FEED_VECTOR
    prule: PowerRule = PowerRule.PAPER_KKT
    architectures: list[Architecture] = Field(
        default_factory=lambda: [Architecture.BD, Architecture.D], min_length=1
    )
    f_c_hz: float = Field(default=2e9, gt=0, allow_inf_nan=False)
    # None means half-wavelength spacing.
    spacing_m: float | None = Field(default=None, gt=0, allow_inf_nan=False)

    @field_validator("K")
    @classmethod
    def _k_not_nan(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("Rician factor must not be NaN")
        return value

    @field_validator("P_s_dbm_list")
    @classmethod
    def _finite_power_caps(cls, value: list[float] | None) -> list[float] | None:
        if value is not None and any(not math.isfinite(v) for v in value):
            raise ValueError("power caps must be finite dBm values")
        return value

    @field_validator("I_th_list")
    @classmethod
    def _non_negative_thresholds(cls, value: list[float]) -> list[float]:
        if any(not math.isfinite(v) or v < 0 for v in value):
            raise ValueError("interference thresholds must be finite and >= 0 W")
        return value

    @field_validator("link_overrides")
    @classmethod
    def _known_links(cls, value: dict[str, RicianParams]) -> dict[str, RicianParams]:
        unknown = set(value) - {"h", "g", "f"}
        if unknown:
            raise ValueError(f"unknown link(s) {sorted(unknown)}; expected h, g, f")
        return value

    @field_validator("architectures")
    @classmethod
    def _unique_architectures(cls, value: list[Architecture]) -> list[Architecture]:
        if len(set(value)) != len(value):
            raise ValueError("architectures must not repeat")
        return value

    @model_validator(mode="after")
    def _check_shape(self):
        if self.Mx * self.My != self.M:
            raise ValueError(f"Mx*My = {self.Mx * self.My} does not match M = {self.M}")
        return self

    @model_validator(mode="after")
    def _check_links(self):
        try:
            GeometryParams(Mx=self.Mx, My=self.My, f_c=self.f_c_hz, q=self.spacing)
            for tag in ("h", "g", "f"):
                self.link(tag)
        except ValidationError as exc:
            raise ValueError(f"invalid array or link parameters: {exc}") from exc
        return self

    @property
    def spacing(self) -> float:
        if self.spacing_m is not None:
            return self.spacing_m
        return speed_of_light / (2 * self.f_c_hz)

    def link(self, tag: str) -> RicianParams:
        if tag in self.link_overrides:
            return self.link_overrides[tag]
        return RicianParams(K=self.K, h_hat=self.h_hat, d=self.distance_m)

    def power_series(self) -> list[float]:
        return list(self.P_s_dbm_list) if self.P_s_dbm_list else [self.P_s_dbm]


class ExperimentConfig(BaseModel):
    """One Monte Carlo campaign; field names mirror the JSON config files."""

    model_config = _FROZEN

    sweep: SweepKind
    sweep_values: list[float] = Field(min_length=1)
    trials: int = Field(default=1000, ge=1)
    master_seed: int = Field(default=2025, ge=0, lt=2**64)
    fixed: FixedParameters = Field(default_factory=FixedParameters)
    step: ManifoldStepConfig = Field(default_factory=ManifoldStepConfig)
    outer: OuterLoopConfig = Field(default_factory=OuterLoopConfig)

    @model_validator(mode="after")
    def _check_sweep(self):
        values = self.sweep_values
        if any(not math.isfinite(v) for v in values):
            raise ValueError("sweep values must be finite")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.sweep is SweepKind.ELEMENT and any(v < 1 or v != int(v) for v in values):
            raise ValueError("element sweep values must be positive integers")
        if self.sweep is SweepKind.ITH and any(v < 0 for v in values):
            raise ValueError("interference thresholds must be >= 0 W")
        return self

    @model_validator(mode="after")
    def _check_budgets(self):
        for series in self.series_values():
            for value in self.sweep_values:
                try:
                    self.link_budget(series, value)
                except (ValidationError, OverflowError) as exc:
                    raise ValueError(
                        f"sweep point (series {series:g}, value {value:g}) has no valid link budget: {exc}"
                    ) from exc
        return self

    def series_values(self) -> list[float]:
        """Curves of the campaign: thresholds for power/element sweeps, power caps for I_th sweeps."""
        if self.sweep is SweepKind.ITH:
            return self.fixed.power_series()
        return list(self.fixed.I_th_list)

    def link_budget(self, series_value: float, sweep_value: float) -> LinkBudget:
        fixed = self.fixed
        P_dbm, I_th = fixed.P_s_dbm, series_value
        if self.sweep is SweepKind.POWER:
            P_dbm = sweep_value
        elif self.sweep is SweepKind.ITH:
            P_dbm, I_th = series_value, sweep_value
        return LinkBudget(
            P_max=dbm_to_watt(P_dbm),
            Q_p=dbm_to_watt(fixed.Q_p_dbm),
            sigma2=fixed.sigma2_w,
            I_th=I_th,
        )

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            gmode=self.fixed.gmode,
            prule=self.fixed.prule,
            step=self.step,
            outer_tol=self.outer.outer_tol,
            max_outer=self.outer.max_outer,
            monotone_guard=self.outer.monotone_guard,
        )
