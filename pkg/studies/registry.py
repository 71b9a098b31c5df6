from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict

from core.grading import GradeResult
from core.schema import (
    FermiParams,
    HardyParams,
    LedgerParams,
    OccupationsParams,
    Spectrum2Params,
    StudyParams,
    TwoBodyParams,
)
from studies.context import StudyContext, StudyOutput


@dataclass(frozen=True)
class StudySpec:
    name: str
    description: str
    params_model: type[StudyParams]
    run: Callable[[StudyParams, StudyContext], StudyOutput]
    grade: Callable[[StudyParams, StudyOutput], GradeResult]
    uses_cache: bool = False


from studies.fermi.grade import grade as fermi_grade
from studies.fermi.run import run as fermi_run
from studies.hardy.grade import grade as hardy_grade
from studies.hardy.run import run as hardy_run
from studies.ledger.grade import grade as ledger_grade
from studies.ledger.run import run as ledger_run
from studies.occupations.grade import grade as occupations_grade
from studies.occupations.run import run as occupations_run
from studies.spectrum2.grade import grade as spectrum2_grade
from studies.spectrum2.run import run as spectrum2_run
from studies.twobody.grade import grade as twobody_grade
from studies.twobody.run import run as twobody_run


STUDY_REGISTRY: Dict[str, StudySpec] = {
    "fermi": StudySpec(
        name="fermi",
        description="Ideal Fermi gas: f(beta, rho), zero-temperature limit, scaling, canonical oracle",
        params_model=FermiParams,
        run=fermi_run,
        grade=fermi_grade,
    ),
    "hardy": StudySpec(
        name="hardy",
        description="Hardy-type inequalities on a ball or a cube as minimum Rayleigh quotients",
        params_model=HardyParams,
        run=hardy_run,
        grade=hardy_grade,
    ),
    "twobody": StudySpec(
        name="twobody",
        description="Radial two-body weighted form: spectrum, zero mode, boundary terms",
        params_model=TwoBodyParams,
        run=twobody_run,
        grade=twobody_grade,
        uses_cache=True,
    ),
    "spectrum2": StudySpec(
        name="spectrum2",
        description="Two fermions in a box: sector spectra, F_g against the free F, tail bound",
        params_model=Spectrum2Params,
        run=spectrum2_run,
        grade=spectrum2_grade,
        uses_cache=True,
    ),
    "occupations": StudySpec(
        name="occupations",
        description="Norm sandwich, occupation bounds and exact ground-state counting",
        params_model=OccupationsParams,
        run=occupations_run,
        grade=occupations_grade,
    ),
    "ledger": StudySpec(
        name="ledger",
        description="Every correction term of the free-energy lower bound for (beta, N, rho)",
        params_model=LedgerParams,
        run=ledger_run,
        grade=ledger_grade,
    ),
}


def get_study(name: str) -> StudySpec:
    try:
        return STUDY_REGISTRY[name]
    except KeyError as exc:
        raise KeyError(f"Unknown study: {name}") from exc


__all__ = ["StudySpec", "STUDY_REGISTRY", "get_study"]
