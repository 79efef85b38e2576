"""Command-line entry point: ``radstab <subcommand> --config run.yaml``.

Exit status is 0 on success, 1 on a run error, 2 on an invalid
configuration and 3 when a hypothesis of the theory fails (raised or
reported by the pipeline).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import SUBCOMMANDS, parse_config
from .core import Radstab
from .exceptions import ConfigurationError, HypothesisError, RadstabError

logger = logging.getLogger("radstab.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3


def _configure_logging(level: int) -> None:
    """Configure root logging and route Python warnings through it."""
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    logging.captureWarnings(True)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for every subcommand."""
    parser = argparse.ArgumentParser(
        prog="radstab",
        description="Transport solver and numerical stability checks",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Pipeline to run")
    parser.add_argument("--config", type=Path, help="Path to YAML configuration")
    parser.add_argument("--out", type=Path, help="Output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="Random seed (overrides ensemble.seed)")
    parser.add_argument("--threads", type=int, help="Worker threads (overrides ensemble.threads)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log DEBUG messages")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Command line entry point."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    _configure_logging(level)

    overrides = {
        "ensemble.seed": args.seed,
        "ensemble.threads": args.threads,
        "output.directory": str(args.out) if args.out is not None else None,
    }
    try:
        config = parse_config(
            args.config if args.config is not None else {},
            subcommand=args.subcommand,
            overrides=overrides,
        )
        output = Radstab().run(config)
    except HypothesisError as exc:
        logger.error("Hypothesis violated (%s): %s", exc.condition or "unnamed", exc)
        return EXIT_HYPOTHESIS
    except ConfigurationError as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_CONFIG
    except RadstabError as exc:
        logger.error("%s failed: %s: %s", args.subcommand, type(exc).__name__, exc)
        return EXIT_ERROR

    if output.hypothesis_violation:
        logger.error("%s reported a hypothesis violation; see the manifest", args.subcommand)
        return EXIT_HYPOTHESIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
