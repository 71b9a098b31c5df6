from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Dict, List, Literal, Sequence, get_args, get_origin

from dotenv import load_dotenv
from tabulate import tabulate

# Load environment variables from .env file
load_dotenv()

from core.json_io import ConfigParseError, build_run_config, read_config_file
from core.runner import RunResult, run_study
from core.schema import PARAMS_MODELS, RunConfig, StudyParams
from studies.registry import STUDY_REGISTRY

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

_PARAM_PREFIX = "param_"


def _choices(annotation: Any) -> List[str] | None:
    if get_origin(annotation) is Literal:
        return [str(a) for a in get_args(annotation)]
    return None


def _add_param_flags(parser: argparse.ArgumentParser, model: type[StudyParams]) -> None:
    for name, info in model.model_fields.items():
        parser.add_argument(
            f"--{name.replace('_', '-')}",
            dest=f"{_PARAM_PREFIX}{name}",
            default=None,
            choices=_choices(info.annotation),
            help=f"{info.description} (default: {info.default})",
        )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--out", help="Output directory (default: results)")
    common.add_argument("--cache-dir", help="Spectrum cache directory")
    common.add_argument("--seed", help="Seed for random draws and iterative solvers")
    common.add_argument("--eigen-tol", help="Relative residual accepted from eigensolvers")
    common.add_argument("--verbose", action="store_true", help="Log progress at INFO level")

    parser = argparse.ArgumentParser(description="Spectra, free energies and bound checks for fermions with point interactions")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, spec in STUDY_REGISTRY.items():
        study_parser = sub.add_parser(name, parents=[common], help=spec.description, description=spec.description)
        _add_param_flags(study_parser, PARAMS_MODELS[name])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    layers: List[Dict[str, Any]] = []
    if args.config:
        layers.append(read_config_file(args.config))
    flags: Dict[str, Any] = {
        "out": args.out,
        "cache_dir": args.cache_dir,
        "seed": args.seed,
        "eigen_tol": args.eigen_tol,
    }
    for key, value in vars(args).items():
        if key.startswith(_PARAM_PREFIX):
            flags[key[len(_PARAM_PREFIX):]] = value
    layers.append(flags)
    return build_run_config(args.subcommand, *layers)


def print_result(result: RunResult) -> None:
    if result.error is not None:
        print(f"✗ ERROR {result.study}: {result.error}", flush=True)
        return
    rows = [
        [c.name, "✓" if c.passed else "✗", f"{c.margin:.4g}"]
        for c in result.grade.checks
    ]
    print(tabulate(rows, headers=["Check", "Pass", "Margin"], tablefmt="github"))
    status = "✓ PASS" if result.passed else "✗ FAIL"
    print(f"{status} {result.study} (score={result.score:.2f}, {result.elapsed:.1f}s)", flush=True)
    for path in result.artifacts:
        print(f"  wrote {path}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
    except ConfigParseError as exc:
        print(f"✗ ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR
    result = run_study(config)
    print_result(result)
    if result.error is not None:
        return EXIT_ERROR
    return EXIT_PASSED if result.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
