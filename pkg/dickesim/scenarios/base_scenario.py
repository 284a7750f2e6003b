import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Mapping, Optional, TypeVar

import numpy as np
import pandas as pd

from dickesim.config import settings
from dickesim.models.output import RunMetadata
from dickesim.models.scenario import ScenarioConfig
from dickesim.solvers import Trajectory
from dickesim.utils.date import utc_now_iso
from dickesim.utils.io import package_versions, write_metadata, write_table

T = TypeVar("T")
R = TypeVar("R")

SETTINGS_RECORDED = ("RTOL", "ATOL", "MAX_STEP", "PRUNE_TOL", "HERMITIAN_TOL", "TRUNCATION_WARN", "DEGENERACY_TOL", "POSITIVITY_TOL")


class ScenarioRunner:
    """
    Base class for the scenario runners.
    Subclasses override the simulate method and return one table per output panel;
    process writes the tables and the metadata record.
    """
    name: str = ""

    def __init__(self, config: ScenarioConfig, output_dir: Optional[str] = None, jobs: Optional[int] = None):
        self.config = config
        self.output_dir = output_dir or settings.OUTPUT_DIR
        self.jobs = max(1, jobs if jobs is not None else settings.JOBS)
        self.metadata = RunMetadata(
            scenario=self.name,
            config=config.model_dump(mode="json"),
            settings={key: getattr(settings, key) for key in SETTINGS_RECORDED},
            versions=package_versions(),
        )
        self._initialize_output_dir()

    def _initialize_output_dir(self) -> None:
        if not os.path.isdir(self.output_dir):
            os.makedirs(self.output_dir, exist_ok=True)
            logging.info(f"Created output directory {self.output_dir}")

    def simulate(self) -> Dict[str, pd.DataFrame]:
        """
        Run the scenario.

        Returns:
            Mapping from panel name to table; each table becomes ``<scenario>_<panel>.csv``
        """
        raise NotImplementedError("Subclasses must implement simulate method")

    def warn(self, message: str) -> None:
        logging.warning(message)
        if message not in self.metadata.warnings:
            self.metadata.warnings.append(message)

    def record_residual(self, label: str, residual: float) -> None:
        self.metadata.residuals[label] = float(residual)

    def record_trajectory(self, label: str, trajectory: Trajectory) -> None:
        """Carry integrator diagnostics into the metadata record."""
        self.metadata.residuals[f"{label}:trace_drift"] = float(trajectory.metadata.get("trace_drift", 0.0))
        if trajectory.metadata.get("truncation_warning"):
            self.warn(f"{label}: top Fock level population {trajectory.metadata['top_fock_population']:.3e}")
        if trajectory.metadata.get("tightened"):
            self.warn(f"{label}: positivity dip, re-ran with tighter tolerances")

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply ``fn`` to every sweep point, concurrently when more than one job is allowed."""
        items = list(items)
        if self.jobs > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                return list(pool.map(fn, items))
        return [fn(item) for item in items]

    def process(self) -> RunMetadata:
        """Run the scenario, write every table and always write the metadata record."""
        self.metadata.started_at = utc_now_iso()
        started = time.perf_counter()
        logging.info(f"Starting scenario {self.name}")
        try:
            tables = self.simulate()
            for panel, frame in tables.items():
                path = write_table(frame, self.output_dir, f"{self.name}_{panel}.csv")
                self.metadata.files.append(os.path.basename(path))
        finally:
            self.metadata.timings["total_s"] = time.perf_counter() - started
            write_metadata(self.metadata, self.output_dir)
        logging.info(f"Scenario {self.name} completed in {self.metadata.timings['total_s']:.2f} s")
        return self.metadata


def trajectory_frame(
    trajectory: Trajectory,
    time_column: str,
    time_scale: float = 1.0,
    columns: Optional[Mapping[str, str]] = None,
    scales: Optional[Mapping[str, float]] = None,
) -> pd.DataFrame:
    """
    Table of a trajectory: the time divided by ``time_scale``, then one column per
    observable (renamed through ``columns``, divided by ``scales``). An ``_imag``
    column is added only when the series is not real.
    """
    columns = columns or {}
    scales = scales or {}
    data = {time_column: trajectory.times / time_scale}
    for label, series in trajectory.expectations.items():
        name = columns.get(label, label)
        values = np.asarray(series) / scales.get(label, 1.0)
        data[name] = np.real(values)
        if np.abs(np.imag(values)).max(initial=0.0) > 1e-9 * max(1.0, np.abs(values).max(initial=0.0)):
            data[f"{name}_imag"] = np.imag(values)
    return pd.DataFrame(data)
