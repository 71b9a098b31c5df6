from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

from core.cache import SpectrumCache
from core.grading import GradeResult
from core.json_io import dump_config, write_json, write_summary
from core.output import write_csv
from core.schema import RunConfig, SummaryRecord
from pointgas.errors import PointGasError
from studies.context import StudyContext, StudyOutput
from studies.registry import get_study

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    study: str
    passed: bool
    score: float
    grade: GradeResult | None
    error: str | None
    artifacts: List[str] = field(default_factory=list)
    elapsed: float = 0.0


def write_outputs(config: RunConfig, output: StudyOutput, grade: GradeResult) -> List[str]:
    """CSV tables, JSON records, the resolved config and the summary record under ``config.out``."""

    out = Path(config.out)
    name = config.subcommand
    paths = [write_csv(out / f"{name}.csv", name, output.rows)]
    for table, rows in output.tables.items():
        paths.append(write_csv(out / f"{name}_{table}.csv", name, rows))
    for record, payload in output.records.items():
        paths.append(write_json(out / f"{record}.json", payload))
    paths.append(dump_config(config, out / f"{name}.config"))
    summary_path = out / f"{name}.summary.json"
    artifacts = [p.as_posix() for p in paths] + [summary_path.as_posix()]
    record = SummaryRecord(
        config=config.model_dump(),
        passed=grade.passed,
        score=grade.score,
        checks=[c.to_dict() for c in grade.checks],
        artifacts=artifacts,
    )
    write_summary(summary_path, record)
    return artifacts


def run_study(config: RunConfig) -> RunResult:
    study = get_study(config.subcommand)
    start = time.time()
    cache = SpectrumCache(config.cache_dir) if study.uses_cache else None
    ctx = StudyContext(config, cache)
    params = config.study_params()
    try:
        output = study.run(params, ctx)
        grade = study.grade(params, output)
    except PointGasError as exc:
        logger.error("%s failed: %s", study.name, exc)
        return RunResult(
            study=study.name,
            passed=False,
            score=0.0,
            grade=None,
            error=f"{type(exc).__name__}: {exc}",
            elapsed=time.time() - start,
        )
    artifacts = write_outputs(config, output, grade)
    failed = [c.name for c in grade.checks if not c.passed]
    if failed:
        logger.warning("%s: %d of %d checks failed: %s", study.name, len(failed), len(grade.checks), failed)
    return RunResult(
        study=study.name,
        passed=grade.passed,
        score=grade.score,
        grade=grade,
        error=None,
        artifacts=artifacts,
        elapsed=time.time() - start,
    )


def aggregate_results(results: Sequence[RunResult]) -> Dict[str, Any]:
    total = len(results)
    passed = sum(1 for r in results if r.passed)
    errors = sum(1 for r in results if r.error is not None)
    return {
        "runs": total,
        "passed": passed,
        "failed": total - passed - errors,
        "errors": errors,
        "pass_rate": (passed / total * 100.0) if total else 0.0,
        "avg_score": sum(r.score for r in results) / total if total else 0.0,
        "elapsed": sum(r.elapsed for r in results),
    }


def group_by_study(results: Sequence[RunResult]) -> Dict[str, List[RunResult]]:
    grouped: Dict[str, List[RunResult]] = {}
    for result in results:
        grouped.setdefault(result.study, []).append(result)
    return grouped


__all__ = [
    "RunResult",
    "aggregate_results",
    "group_by_study",
    "run_study",
    "write_outputs",
]
