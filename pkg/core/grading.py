from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence


@dataclass(slots=True)
class CheckResult:
    """One invariant or acceptance assertion with its margin (>= 0 means satisfied)."""

    name: str
    passed: bool
    margin: float
    signals: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        margin = float(self.margin)
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "margin": margin if math.isfinite(margin) else None,
            "signals": dict(self.signals),
        }


@dataclass(slots=True)
class GradeResult:
    """Container returned by study graders."""

    passed: bool
    score: float
    checks: List[CheckResult] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": bool(self.passed),
            "score": float(self.score),
            "checks": [c.to_dict() for c in self.checks],
        }


def check(name: str, margin: float, tolerance: float = 0.0, **signals: Any) -> CheckResult:
    """Pass when margin >= -tolerance; a NaN margin fails."""

    value = float(margin)
    return CheckResult(name, bool(value >= -tolerance), value, signals)


def combine(checks: Sequence[CheckResult]) -> GradeResult:
    checks = list(checks)
    passed = sum(1 for c in checks if c.passed)
    score = passed / len(checks) if checks else 0.0
    return GradeResult(bool(checks) and passed == len(checks), score, checks)


__all__ = ["CheckResult", "GradeResult", "check", "combine"]
