"""
scenarios/config.py

Behavior:
    - ScenarioConfig is the whole run document; unknown keys are rejected at
      the top level and inside params.
    - params is validated against the scenario's own model and replaced by the
      fully resolved dict (defaults filled in), which is what manifests echo.
"""
from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from quantum.statmech.constants import HIGH_TEMPERATURE, LOW_TEMPERATURE


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------- Per-scenario parameters ----------
class PolarizationParams(StrictModel):
    c1: float = 0.6
    c2: float = 0.8
    epsilon: float = Field(0.0, ge=0.0, le=1.0)
    repeats: int = Field(2, ge=1, le=3)
    trajectories: int = Field(10_000, ge=1)
    kept: int = Field(3, ge=0)
    environment_epsilon: float = Field(0.01, ge=0.0, le=1.0)
    environment_dof: List[int] = Field(default_factory=lambda: [0, 10, 100, 1000, 10_000])


class ModalPointerParams(StrictModel):
    c1_squared: float = Field(0.7, gt=0.0, lt=1.0)
    tau: float = Field(1.0, gt=0.0)
    t_max: float = Field(6.0, gt=0.0)
    dt: float = Field(0.002, gt=0.0)
    paths: int = Field(10_000, ge=1)


class DecayCountingParams(StrictModel):
    gamma: float = Field(0.5, gt=0.0)
    eta: float = Field(0.01, gt=0.0)
    paths: int = Field(10_000, ge=1)
    horizon: Optional[float] = Field(None, gt=0.0, description="defaults to 3 / gamma")
    kept: int = Field(3, ge=0)


class DecayHomodyneParams(StrictModel):
    gamma: float = Field(0.5, gt=0.0)
    betas: List[float] = Field(default_factory=lambda: [0.1, 1.0, 10.0], min_length=1)
    eta_max: float = Field(0.01, gt=0.0)
    paths: int = Field(1000, ge=2)
    horizon: Optional[float] = Field(None, gt=0.0, description="defaults to 2 / gamma")
    kept: int = Field(3, ge=0)


class RotorModel(StrictModel):
    preset: Literal["chaotic_demo", "regular_demo"] = "chaotic_demo"
    asymmetry: Optional[float] = Field(None, ge=0.0)
    eccentricity: Optional[float] = Field(None, ge=0.0, lt=1.0)
    phi0: Optional[float] = None
    ell0: Optional[float] = None
    dt: Optional[float] = Field(None, gt=0.0)


class HyperionClassicalParams(RotorModel):
    orbits: float = Field(20.0, gt=0.0)
    lyapunov_orbits: float = Field(200.0, gt=0.0)
    liouville_orbits: int = Field(5, ge=1)


class HyperionQuantumParams(RotorModel):
    hbar_eff: float = Field(0.01, gt=0.0)
    delta_x: Optional[float] = Field(None, gt=0.0, description="defaults to sqrt(sqrt(hbar / 2) * cell_scale)")
    cell_scale: float = Field(1.0, gt=0.0)
    orbits: float = Field(1.0, gt=0.0)
    samples_per_unit: int = Field(20, ge=1)
    p_min: float = -0.5
    p_max: float = 3.5
    husimi_x: int = Field(96, ge=1)
    husimi_p: int = Field(96, ge=1)
    cut_ratio: float = Field(10.0, ge=10.0)

    @model_validator(mode="after")
    def _momentum_range(self):
        if self.p_max <= self.p_min:
            raise ValueError("p_max must exceed p_min")
        return self


class EhrenfestSweepParams(RotorModel):
    hbar_values: List[float] = Field(default_factory=lambda: [1e-2, 3e-3, 1e-3, 3e-4, 1e-4], min_length=4)
    threshold: float = Field(0.5, gt=0.0)
    horizon_orbits: float = Field(20.0, gt=0.0)
    lyapunov_orbits: float = Field(200.0, gt=0.0)
    free_rotor_control: bool = True
    control_horizon_orbits: float = Field(40.0, gt=0.0)

    @field_validator("hbar_values")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(v <= 0.0 for v in values):
            raise ValueError("hbar_eff values must be positive")
        return values


class IsingParams(StrictModel):
    L: int = Field(16, ge=2)
    temperatures: List[float] = Field(default_factory=lambda: [LOW_TEMPERATURE, HIGH_TEMPERATURE], min_length=1)
    sweeps: int = Field(10_000, ge=1)
    start: Literal["up", "random"] = "up"
    exact_check: bool = True
    exact_sweeps: int = Field(20_000, ge=20)

    @field_validator("temperatures")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(v <= 0.0 for v in values):
            raise ValueError("temperatures must be positive")
        return values


class ThermalizationParams(StrictModel):
    d_mc: int = Field(500, ge=1, le=2000)
    sector_dims: List[int] = Field(default_factory=lambda: [100, 150, 250], min_length=1)
    t_max: float = Field(50.0, gt=0.0)
    n_times: int = Field(2000, ge=2)
    paths: int = Field(20, ge=2)
    duration: float = Field(10.0, gt=0.0)
    block_diagonal_control: bool = True

    @model_validator(mode="after")
    def _sectors_fill_subspace(self):
        if any(d <= 0 for d in self.sector_dims):
            raise ValueError("sector_dims must be positive")
        if sum(self.sector_dims) != self.d_mc:
            raise ValueError(f"sector_dims add up to {sum(self.sector_dims)}, not d_mc = {self.d_mc}")
        return self


class TqHeadlineParams(StrictModel):
    t_c_days: float = Field(100.0, gt=0.0)
    radius_m: float = Field(1.4e5, gt=0.0)
    mass_kg: float = Field(1e19, gt=0.0)
    temperature_k: float = Field(100.0, gt=0.0)


class ModalToyParams(StrictModel):
    dim: int = Field(3, ge=2, le=16)
    hamiltonian_scale: float = Field(1.0, gt=0.0)
    dt: float = Field(0.01, gt=0.0)
    steps: int = Field(300, ge=1)
    paths: int = Field(10_000, ge=2)


PARAMS_MODELS: Dict[str, Type[StrictModel]] = {
    "polarization": PolarizationParams,
    "modal_pointer": ModalPointerParams,
    "decay_counting": DecayCountingParams,
    "decay_homodyne": DecayHomodyneParams,
    "hyperion_classical": HyperionClassicalParams,
    "hyperion_quantum": HyperionQuantumParams,
    "ehrenfest_sweep": EhrenfestSweepParams,
    "ising": IsingParams,
    "thermalization": ThermalizationParams,
    "tq_headline": TqHeadlineParams,
    "modal_toy": ModalToyParams,
}

ScenarioName = Literal[
    "polarization",
    "modal_pointer",
    "decay_counting",
    "decay_homodyne",
    "hyperion_classical",
    "hyperion_quantum",
    "ehrenfest_sweep",
    "ising",
    "thermalization",
    "tq_headline",
    "modal_toy",
]


# ---------- Run document ----------
class ScenarioConfig(StrictModel):
    scenario: ScenarioName
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    output_dir: str = "runs"
    format: Literal["csv", "json", "both"] = "both"
    threads: Optional[int] = Field(None, ge=1)

    def typed_params(self) -> StrictModel:
        return PARAMS_MODELS[self.scenario].model_validate(self.params)

    def resolved(self) -> dict:
        return self.model_dump(mode="json")


class ConfigError(ValueError):
    """Invalid run document; ``diagnostics`` holds one (location, message) pair per problem."""

    def __init__(self, diagnostics: List[Tuple[str, str]], lines: Optional[List[str]] = None):
        self.diagnostics = list(diagnostics)
        self.lines = lines or [f"{loc}: {msg}" for loc, msg in self.diagnostics]
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in self.diagnostics))


def _diagnostics(error: ValidationError, prefix: Tuple[Any, ...] = ()) -> List[Tuple[str, str]]:
    return [(".".join(str(part) for part in prefix + tuple(item["loc"])) or "<document>", item["msg"])
            for item in error.errors()]


def resolve_config(document: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """
    Validate a run document and fill in every default.

    :param document: parsed config (or the ``config`` member of a manifest)
    :param overrides: top-level values that win over the document (CLI flags, environment)
    :raises ConfigError: listing every invalid or unknown field
    """
    merged = dict(document)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        config = ScenarioConfig.model_validate(merged)
    except ValidationError as exc:
        raise ConfigError(_diagnostics(exc)) from exc
    try:
        params = PARAMS_MODELS[config.scenario].model_validate(config.params)
    except ValidationError as exc:
        raise ConfigError(_diagnostics(exc, ("params",))) from exc
    return config.model_copy(update={"params": params.model_dump(mode="json")})
