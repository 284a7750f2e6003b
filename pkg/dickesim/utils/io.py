import json
import logging
import os
import platform
from importlib import metadata as importlib_metadata
from typing import Any, Dict

import pandas as pd
from pydantic import ValidationError

from dickesim.exceptions import ConfigError
from dickesim.models.output import RunMetadata
from dickesim.models.scenario import SCENARIO_CONFIGS, ScenarioConfig

FLOAT_FORMAT = "%.12g"
TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "pydantic-settings")


def load_config(path: str, scenario: str) -> ScenarioConfig:
    """
    Read and validate a scenario config document.
    :param path: JSON file; its ``scenario`` field may be omitted
    :param scenario: scenario named on the command line
    :return: validated config model
    """
    if scenario not in SCENARIO_CONFIGS:
        raise ConfigError(f"Unknown scenario {scenario!r}; expected one of {', '.join(SCENARIO_CONFIGS)}")
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")

    declared = document.setdefault("scenario", scenario)
    if declared != scenario:
        raise ConfigError(f"Config file {path} is for scenario {declared!r}, not {scenario!r}")
    # ValidationError is left to the caller; it names the offending fields
    return SCENARIO_CONFIGS[scenario].model_validate(document)


def describe_validation_error(error: ValidationError) -> str:
    """One line per failing field, e.g. ``time.steps: Input should be greater than or equal to 2``."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "\n".join(lines)


def write_table(frame: pd.DataFrame, output_dir: str, filename: str) -> str:
    """
    Write a CSV table with fixed float formatting so re-runs are byte-identical.
    :return: path of the written file
    """
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, filename)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding='utf-8')
    logging.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def write_json(data: Dict[str, Any], output_dir: str, filename: str) -> str:
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, filename)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
    logging.info(f"Wrote {path}")
    return path


def write_metadata(metadata: RunMetadata, output_dir: str) -> str:
    return write_json(metadata.model_dump(), output_dir, f"{metadata.scenario}_metadata.json")


def package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = importlib_metadata.version(name)
        except importlib_metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def machine_info() -> Dict[str, str]:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "python": platform.python_version(),
        "cpu_count": str(os.cpu_count()),
    }
