"""
Scenario config documents. Every rate and frequency is given relative to the
scenario's reference rate, and every time grid is dimensionless in that unit.
"""
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dickesim.models.rates import Rates
from dickesim.models.states import InitialStateSpec
from dickesim.operators import OBSERVABLES


class TimeGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_max: float = Field(gt=0, description="End of the grid, in the scenario's time unit")
    steps: int = Field(ge=2, description="Number of grid points, both ends included")

    def points(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps)


class SolverOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rtol: Optional[float] = Field(default=None, gt=0)
    atol: Optional[float] = Field(default=None, gt=0)
    max_step: Optional[float] = Field(default=None, gt=0)
    use_pisolve: bool = False
    monitor_positivity: bool = False

    def integrator_kwargs(self) -> Dict[str, Optional[float]]:
        return {"rtol": self.rtol, "atol": self.atol, "max_step": self.max_step}


class HamiltonianTerm(BaseModel):
    """``coefficient * J_axis ** power``."""
    model_config = ConfigDict(extra="forbid")

    axis: Literal["x", "y", "z"]
    coefficient: float
    power: int = Field(default=1, ge=1, le=2)


def _default_superradiance_states() -> List[InitialStateSpec]:
    kinds = ("excited", "ghz", "css_plus", "css_minus", "dicke_half", "dark")
    return [InitialStateSpec(kind=kind) for kind in kinds]


def _geometric(start: float, stop: float, count: int) -> List[float]:
    return [float(v) for v in np.geomspace(start, stop, count)]


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: str
    solver: SolverOptions = Field(default_factory=SolverOptions)


class SimulateConfig(ScenarioConfig):
    scenario: Literal["simulate"] = "simulate"
    n_tls: int = Field(ge=1)
    rates: Rates = Field(default_factory=Rates)
    hamiltonian: List[HamiltonianTerm] = Field(default_factory=list)
    initial_state: InitialStateSpec
    time: TimeGrid
    observables: List[str] = Field(default_factory=lambda: ["jz", "jpjm", "j2"])

    @field_validator("observables")
    @classmethod
    def _known_observables(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name.lower() not in OBSERVABLES]
        if unknown:
            raise ValueError(f"unknown observables {unknown}; expected names from {list(OBSERVABLES)}")
        return value

    @model_validator(mode="after")
    def _pisolve_needs_diagonal(self):
        if self.solver.use_pisolve and any(term.axis != "z" for term in self.hamiltonian):
            raise ValueError("use_pisolve needs a Hamiltonian built from Jz only")
        return self


class SuperradianceConfig(ScenarioConfig):
    """Collective emission with local dephasing; time in units of t_D = ln N / (N gamma_Down)."""
    scenario: Literal["superradiance"] = "superradiance"
    n_tls: int = Field(default=20, ge=2)
    collective_emission: float = Field(default=1.0, gt=0, description="Reference rate gamma_Down")
    local_dephasing_ratios: List[float] = Field(default_factory=lambda: [1.0, 0.0])
    omega0: float = Field(default=0.0, description="TLS frequency; 0 is the rotating frame")
    initial_states: List[InitialStateSpec] = Field(default_factory=_default_superradiance_states)
    time: TimeGrid = Field(default_factory=lambda: TimeGrid(t_max=10.0, steps=401))

    @field_validator("local_dephasing_ratios")
    @classmethod
    def _non_negative(cls, value: List[float]) -> List[float]:
        if any(v < 0 for v in value):
            raise ValueError("dephasing ratios must be non-negative")
        return value


class SteadySuperradianceConfig(ScenarioConfig):
    """Steady emission under local pumping; pump in units of N gamma_Down."""
    scenario: Literal["steady-superradiance"] = "steady-superradiance"
    modes: List[Literal["pump", "detailed_balance", "grid"]] = Field(default_factory=lambda: ["pump", "detailed_balance"])
    n_values: List[int] = Field(default_factory=lambda: [10, 20, 30, 40])
    collective_emission: float = Field(default=1.0, gt=0)
    pump_ratios: List[float] = Field(default_factory=lambda: _geometric(0.01, 100.0, 41))
    local_emission_ratio: float = Field(default=0.0, ge=0, description="gamma_down / (N gamma_Down) in pump mode")
    high_temperature: bool = Field(default=True, description="Include the n_T -> infinity sweep (gamma_down = gamma_up)")
    n_thermal_values: List[float] = Field(default_factory=list)
    grid_n_tls: int = Field(default=40, ge=2)
    gamma0_values: List[float] = Field(default_factory=lambda: _geometric(0.01, 10.0, 13))
    n_thermal_grid: List[float] = Field(default_factory=lambda: _geometric(0.01, 100.0, 13))

    @model_validator(mode="after")
    def _check_sweeps(self):
        if any(r <= 0 for r in self.pump_ratios):
            raise ValueError("pump_ratios must be positive")
        if any(n < 2 for n in self.n_values):
            raise ValueError("n_values must be at least 2")
        if any(v <= 0 for v in self.n_thermal_values + self.gamma0_values + self.n_thermal_grid):
            raise ValueError("thermal occupations and gamma0 values must be positive")
        return self


class RateScan(BaseModel):
    """min xi^2 over a (gamma_down, gamma_Down) grid at fixed N."""
    model_config = ConfigDict(extra="forbid")

    local_emission_values: List[float]
    collective_emission_values: List[float]


class SizeScan(BaseModel):
    """min xi^2 over a (gamma_down, N) grid at fixed gamma_Down."""
    model_config = ConfigDict(extra="forbid")

    local_emission_values: List[float]
    n_values: List[int]
    collective_emission: float = 0.2


class SqueezingConfig(ScenarioConfig):
    """Two-axis twisting ``-i Lambda (J+^2 - J-^2)``; rates and times in units of Lambda."""
    scenario: Literal["squeezing"] = "squeezing"
    n_tls: int = Field(default=20, ge=2)
    twisting: float = Field(default=1.0, gt=0, description="Reference rate Lambda")
    local_emission: float = Field(default=0.2, ge=0)
    collective_emission: float = Field(default=0.0, ge=0)
    initial_states: List[InitialStateSpec] = Field(default_factory=lambda: [InitialStateSpec(kind="excited")])
    scan_jj: bool = True
    scan_all: bool = False
    tradeoff: bool = True
    tradeoff_rate: float = Field(default=0.2, gt=0, description="Rate of the single channel in the local-only and collective-only runs")
    scan_rates: Optional[RateScan] = None
    scan_sizes: Optional[SizeScan] = None
    time: TimeGrid = Field(default_factory=lambda: TimeGrid(t_max=1.0, steps=1001))


def _default_open_dicke_variants() -> Dict[str, Rates]:
    return {
        "a": Rates(local_pumping=0.1),
        "b": Rates(local_emission=0.1),
        "c": Rates(local_emission=0.1, collective_pumping=0.1),
        "d": Rates(local_emission=0.1, collective_emission=0.1),
    }


class WignerGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x_max: float = Field(default=6.0, gt=0)
    points: int = Field(default=121, ge=3)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.points)


class OpenDickeConfig(ScenarioConfig):
    """Steady state of the Dicke model in a lossy cavity; the presets take omega0 = 1 as the unit."""
    scenario: Literal["open-dicke"] = "open-dicke"
    n_tls: int = Field(default=10, ge=1)
    n_ph: int = Field(default=20, ge=2)
    omega0: float = Field(default=1.0, gt=0)
    omega_cav: float = Field(default=1.0, gt=0)
    g: Optional[float] = Field(default=None, ge=0, description="Defaults to 2 omega0 / sqrt(N)")
    kappa: float = Field(default=1.0, gt=0)
    local_dephasing: float = Field(default=0.01, ge=0)
    variants: Dict[str, Rates] = Field(default_factory=_default_open_dicke_variants)
    wigner: WignerGrid = Field(default_factory=WignerGrid)

    @property
    def coupling(self) -> float:
        return self.g if self.g is not None else 2.0 * self.omega0 / np.sqrt(self.n_tls)


class TimeCrystalConfig(ScenarioConfig):
    """Driven collective decay; rates and times in units of omega_x."""
    scenario: Literal["time-crystal"] = "time-crystal"
    n_tls: int = Field(default=30, ge=2)
    omega_x: float = Field(default=1.0, gt=0)
    collective_emission: float = Field(gt=0, description="gamma_Down; no default, presets choose it")
    local_emission: float = Field(default=0.0, ge=0)
    local_dephasing_values: List[float] = Field(default_factory=lambda: [0.0, 0.01, 0.1, 1.0])
    collective_dephasing_values: List[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0])
    initial_state: InitialStateSpec = Field(default_factory=lambda: InitialStateSpec(kind="excited"))
    amplitude_time: float = Field(default=10.0, gt=0, description="Centre of the window where the oscillation amplitude is read")
    time: TimeGrid = Field(default_factory=lambda: TimeGrid(t_max=20.0, steps=2001))

    @model_validator(mode="after")
    def _window_inside_grid(self):
        if self.amplitude_time + np.pi > self.time.t_max:
            raise ValueError("amplitude_time plus half a drive period must lie inside the time grid")
        return self


class ChannelCombination(BaseModel):
    """Extra channels on top of the joint collective emission."""
    model_config = ConfigDict(extra="forbid")

    label: str
    collective_pumping: float = Field(default=0.0, ge=0, description="joint gamma_Up")
    local_emission: float = Field(default=0.0, ge=0)
    local_dephasing: float = Field(default=0.0, ge=0)
    ensemble_emission: float = Field(default=0.0, ge=0, description="gamma_Down,k on each ensemble")


def _default_combinations() -> List[ChannelCombination]:
    return [
        ChannelCombination(label="joint"),
        ChannelCombination(label="joint+local_emission", local_emission=1.0),
        ChannelCombination(label="joint+local_dephasing", local_dephasing=1.0),
        ChannelCombination(label="joint+ensemble_emission", ensemble_emission=1.0),
        ChannelCombination(label="joint+joint_pumping", collective_pumping=0.1),
    ]


class TwoEnsemblesConfig(ScenarioConfig):
    """Two ensembles sharing a decay channel; time in units of t_D = ln N2 / (N2 gamma_Down)."""
    scenario: Literal["two-ensembles"] = "two-ensembles"
    n1: int = Field(default=5, ge=1)
    n2: int = Field(default=15, ge=1)
    omega0: float = Field(default=1.0, ge=0)
    collective_emission: float = Field(default=1.0, gt=0, description="joint gamma_Down, the reference rate")
    combinations: List[ChannelCombination] = Field(default_factory=_default_combinations)
    time: TimeGrid = Field(default_factory=lambda: TimeGrid(t_max=50.0, steps=501))

    @model_validator(mode="after")
    def _delay_time_defined(self):
        if self.n2 < 2:
            raise ValueError("n2 must be at least 2 for the delay time ln N2 / N2")
        return self


class SpectrumGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    omega_min: float = 0.6
    omega_max: float = 1.4
    points: int = Field(default=81, ge=2)

    def points_array(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.points)


class UscConfig(ScenarioConfig):
    """Dressed versus bare master equation; frequencies and times in units of omega0."""
    scenario: Literal["usc"] = "usc"
    n_tls: int = Field(default=10, ge=1)
    n_ph: int = Field(default=3, ge=2)
    omega0: float = Field(default=1.0, gt=0)
    omega_cav: float = Field(default=1.0, gt=0)
    g: float = Field(default=0.1, ge=0)
    kappa: float = Field(default=0.01, ge=0)
    local_emission: float = Field(default=0.01, ge=0)
    local_coupling: Literal["jx", "jminus"] = "jx"
    time: TimeGrid = Field(default_factory=lambda: TimeGrid(t_max=500.0, steps=501))
    spectrum: SpectrumGrid = Field(default_factory=SpectrumGrid)


class BenchConfig(ScenarioConfig):
    """Timings of assembly and of the superradiant decay (steps points up to t_max t_D)."""
    scenario: Literal["bench"] = "bench"
    n_values: List[int] = Field(default_factory=lambda: [10, 20, 50, 100])
    steps: int = Field(default=1000, ge=2)
    t_max: float = Field(default=4.0, gt=0)
    evolve_max_n: int = Field(default=40, ge=1, description="Largest N also timed through the full evolve path")

    @field_validator("n_values")
    @classmethod
    def _at_least_two(cls, value: List[int]) -> List[int]:
        if any(n < 2 for n in value):
            raise ValueError("n_values must be at least 2")
        return value


SCENARIO_CONFIGS = {
    "simulate": SimulateConfig,
    "superradiance": SuperradianceConfig,
    "steady-superradiance": SteadySuperradianceConfig,
    "squeezing": SqueezingConfig,
    "open-dicke": OpenDickeConfig,
    "time-crystal": TimeCrystalConfig,
    "two-ensembles": TwoEnsemblesConfig,
    "usc": UscConfig,
    "bench": BenchConfig,
}
