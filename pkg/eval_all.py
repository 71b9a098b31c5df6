from __future__ import annotations

import argparse
import logging
import time
from typing import List

from dotenv import load_dotenv
from tabulate import tabulate

# Load environment variables from .env file
load_dotenv()

from config import DEFAULT_SEED
from core.json_io import build_run_config
from core.runner import aggregate_results, group_by_study, run_study
from studies.registry import STUDY_REGISTRY


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Run every study with its default parameters")
    parser.add_argument("--study", help="Name of the study to run", choices=sorted(STUDY_REGISTRY.keys()))
    parser.add_argument("--runs", type=int, default=1, help="Runs per study, each with its own seed")
    parser.add_argument("--out", default="results", help="Output directory")
    parser.add_argument("--cache-dir", help="Spectrum cache directory")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed of the first run")
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO level")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    study_names: List[str]
    if args.study:
        study_names = [args.study]
    else:
        study_names = list(STUDY_REGISTRY.keys())

    print(f"Starting evaluation: {args.runs} runs of studies: {study_names}", flush=True)
    results = []
    for study_name in study_names:
        for run_index in range(args.runs):
            start_time = time.time()
            print(f"[{run_index + 1}/{args.runs}] Starting {study_name}...", end=" ", flush=True)
            config = build_run_config(
                study_name,
                {
                    "out": f"{args.out}/run{run_index}" if args.runs > 1 else args.out,
                    "cache_dir": args.cache_dir,
                    "seed": args.seed + run_index,
                },
            )
            try:
                result = run_study(config)
            except KeyboardInterrupt:
                print("\nInterrupted by user", flush=True)
                raise
            results.append(result)
            elapsed = time.time() - start_time
            if result.error is not None:
                print(f"✗ ERROR ({elapsed:.1f}s): {result.error[:80]}", flush=True)
            else:
                status = "✓ PASS" if result.passed else "✗ FAIL"
                print(f"{status} (score={result.score:.2f}, {elapsed:.1f}s)", flush=True)

    grouped = group_by_study(results)
    table_rows = []
    for study_name in study_names:
        summary = aggregate_results(grouped.get(study_name, []))
        table_rows.append(
            [
                study_name,
                summary["passed"],
                summary["failed"],
                summary["errors"],
                f"{summary['pass_rate']:.1f}%",
                f"{summary['avg_score']:.2f}",
                f"{summary['elapsed']:.1f}",
            ]
        )

    if table_rows:
        headers = ["Study", "Passed", "Failed", "Errors", "Pass Rate", "Avg Score", "Time (s)"]
        print(tabulate(table_rows, headers=headers, tablefmt="github"))


if __name__ == "__main__":
    main()
