"""
Command-line entry point: ``lna-ee-sim --preset fig6_radius --out results.csv``.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import load_config
from .exceptions import ConfigError, ExportError
from .harness import (
    OUTPUT_FORMATS, PRESET_ALIASES, PRESETS, SOLVER_NAMES, build_spec, export, run_experiment,
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lna-ee-sim",
        description="Monte Carlo study of uplink energy efficiency with a shared LNA gain.",
    )
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--preset", choices=PRESETS + tuple(PRESET_ALIASES), help="Built-in experiment")
    source.add_argument("--config", type=Path, help="TOML configuration file (custom experiment)")
    parser.add_argument("--seed", type=int, default=None, help="Master seed (default: rng_seed)")
    parser.add_argument("--realizations", type=int, default=None, help="Realizations per sweep point")
    parser.add_argument("--solvers", default=None,
                        help=f"Comma-separated subset of {','.join(SOLVER_NAMES)}")
    parser.add_argument("--out", type=Path, default=Path("results.csv"), help="Output file")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default=None,
                        help="Output format (default: from the --out suffix, else csv)")
    parser.add_argument("--threads", type=int, default=1, help="Realizations run in parallel")
    parser.add_argument("--trace-omega", action="store_true", help="Export per-gain U traces")
    parser.add_argument("--timing", action="store_true", help="Export solver wall times")
    parser.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Logging verbosity")
    parser.add_argument("--list-presets", action="store_true", help="List presets and exit")
    return parser


def _output_format(args: argparse.Namespace) -> str:
    if args.format:
        return args.format
    suffix = args.out.suffix.lstrip(".").lower()
    return suffix if suffix in OUTPUT_FORMATS else "csv"


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run an experiment and export its records.

    Returns:
        Process exit code: 0 on success, 2 on configuration errors, 1 on
        export errors
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    if args.list_presets:
        aliases = {v: k for k, v in PRESET_ALIASES.items()}
        for name in PRESETS:
            print(f"{name} (alias: {aliases[name]})" if name in aliases else name)
        return 0

    try:
        config_file = load_config(args.config) if args.config else None
        preset = args.preset or ("custom" if config_file else "fig6_radius")
        spec = build_spec(
            preset,
            config_file=config_file,
            seed=args.seed,
            realizations=args.realizations,
            solvers=args.solvers.split(",") if args.solvers else None,
            output_path=args.out,
            output_format=_output_format(args),
            threads=args.threads,
            trace_omega=args.trace_omega,
            timing=args.timing,
        )
    except ConfigError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return 2

    records = run_experiment(spec)
    try:
        paths = export(records, spec.output_format, spec.output_path,
                       timing=spec.timing, trace=spec.trace_omega)
    except ExportError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    print(f"{len(records)} records -> {paths[0]} (summary: {paths[1]})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
