import argparse
import logging
import sys
import traceback
from typing import List, Optional

from pydantic import ValidationError

from dickesim.exceptions import ConfigError, SolverError
from dickesim.models.scenario import SCENARIO_CONFIGS
from dickesim.scenarios import RUNNERS
from dickesim.utils.io import describe_validation_error, load_config

logging.basicConfig(level=logging.INFO, format='%(message)s')

EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_ERROR = 3


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="dickesim", description="Permutation-invariant open dynamics of N two-level systems")
    parser.add_argument("scenario", choices=sorted(SCENARIO_CONFIGS), help="scenario to run")
    parser.add_argument("--config", required=True, help="scenario config (JSON)")
    parser.add_argument("--out", default=None, help="output directory (default: settings.OUTPUT_DIR)")
    parser.add_argument("--jobs", type=int, default=None, help="concurrent sweep points")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser.parse_args(argv)


def run(argv: Optional[List[str]] = None) -> None:
    """Validate the config, run the scenario and write its tables and metadata."""
    args = parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    config = load_config(args.config, args.scenario)
    runner = RUNNERS[args.scenario](config, output_dir=args.out, jobs=args.jobs)
    metadata = runner.process()
    logging.info(f"Scenario {args.scenario} wrote {len(metadata.files)} files to {runner.output_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        run(argv)
    except ValidationError as e:
        logging.error(f"Invalid config:\n{describe_validation_error(e)}")
        return EXIT_CONFIG_ERROR
    except ConfigError as e:
        logging.error(f"Config error: {e}")
        return EXIT_CONFIG_ERROR
    except SolverError as e:
        logging.error(f"Solver failure: {e}")
        traceback.print_exc()
        return EXIT_SOLVER_ERROR
    except Exception as e:
        logging.error(f"Error during simulation: {e}")
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
