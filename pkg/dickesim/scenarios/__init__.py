from typing import Dict, Type

from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.scenarios.bench import BenchRunner
from dickesim.scenarios.open_dicke import OpenDickeRunner
from dickesim.scenarios.simulate import SimulateRunner
from dickesim.scenarios.squeezing import SqueezingRunner
from dickesim.scenarios.steady_superradiance import SteadySuperradianceRunner
from dickesim.scenarios.superradiance import SuperradianceRunner
from dickesim.scenarios.time_crystal import TimeCrystalRunner
from dickesim.scenarios.two_ensembles import TwoEnsemblesRunner
from dickesim.scenarios.ultrastrong import UscRunner

RUNNERS: Dict[str, Type[ScenarioRunner]] = {
    runner.name: runner
    for runner in (
        SimulateRunner,
        SuperradianceRunner,
        SteadySuperradianceRunner,
        SqueezingRunner,
        OpenDickeRunner,
        TimeCrystalRunner,
        TwoEnsemblesRunner,
        UscRunner,
        BenchRunner,
    )
}
