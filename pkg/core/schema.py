from __future__ import annotations

from typing import Any, Dict, List, Literal, Mapping, get_args, get_origin

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import (
    CSV_FORMAT_VERSION,
    DEFAULT_C_DELTA,
    DEFAULT_C_ENTROPY,
    DEFAULT_C_ETA,
    DEFAULT_ELL_PREFACTOR,
    DEFAULT_KAPPA,
    DEFAULT_SEED,
    EIGEN_TOL,
)

Subcommand = Literal["fermi", "hardy", "twobody", "spectrum2", "occupations", "ledger"]


def _is_list(annotation: Any) -> bool:
    if get_origin(annotation) in (list, tuple):
        return True
    return any(get_origin(arg) in (list, tuple) for arg in get_args(annotation))


class StudyParams(BaseModel):
    """Base for per-subcommand parameters; comma-separated text becomes a list."""

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def _split_text(cls, data: Any) -> Any:
        if not isinstance(data, Mapping):
            return data
        out = dict(data)
        for name, info in cls.model_fields.items():
            value = out.get(name)
            if not isinstance(value, str):
                continue
            if value.strip().lower() in ("", "none") and info.default is None:
                out[name] = None
            elif _is_list(info.annotation):
                out[name] = [item.strip() for item in value.split(",") if item.strip()]
        return out


class FermiParams(StudyParams):
    beta: List[float] = Field(default=[1.0], description="Inverse temperatures")
    rho: List[float] = Field(default=[1.0], description="Densities")
    q: List[int] = Field(default=[2], description="Spin states")
    eta: float = Field(default=1000.0, description="beta rho^(2/3) for the zero-temperature check")
    oracle_modes: int = Field(default=12, description="One-body modes in the canonical-vs-enumeration check")


class HardyParams(StudyParams):
    lemma: Literal["ball", "box", "classic"] = Field(default="box", description="Which inequality to test")
    c0: float | None = Field(default=None, description="Gradient coefficient (default by lemma)")
    c1: float | None = Field(default=None, description="Mass coefficient (default by lemma)")
    samples: int = Field(default=20, description="Singularity positions for the box lemma (>= 12)")
    cells: List[int] = Field(default=[10, 20, 40], description="Grid ladder, cells per ell")
    ell: float = Field(default=1.0, description="Domain size")
    threshold: float = Field(default=0.95, description="Required lambda_min on the finest grid")
    frontier_c0: List[float] | None = Field(
        default=None, description="Gradient coefficients for the critical c1 frontier (none to skip)"
    )


class TwoBodyParams(StudyParams):
    a_inv: float = Field(default=0.0, description="Inverse scattering length")
    R: float = Field(default=1.0, description="Outer radius")
    cells: List[int] = Field(default=[100, 200, 400], description="Radial grid ladder")
    modes: int = Field(default=5, description="Eigenvalues per grid")
    outer: Literal["dirichlet", "neumann"] = Field(default="dirichlet", description="Outer boundary condition")


class Spectrum2Params(StudyParams):
    beta: List[float] = Field(default=[0.5, 1.0, 2.0], description="Inverse temperatures")
    L: List[float] = Field(default=[1.5, 2.0, 2.5], description="Box sides at the base density")
    q: int = Field(default=2, description="Spin states")
    cells: List[int] = Field(default=[4, 8], description="Cells per side, one solve per resolution")
    window: float = Field(default=50.0, description="Solved window above the free pair ground level, in units of T")
    walls: Literal["dirichlet", "neumann"] = Field(default="dirichlet", description="Box walls")
    tolerance: float = Field(default=0.05, description="Allowed discretization slack in F_g <= F, relative")
    trivial_rtol: float = Field(
        default=5e-3, description="Allowed relative gap between the extrapolated q=1 results and the free continuum"
    )
    max_modes: int = Field(default=48, description="Mode cap per sector for iterative solves")
    c_entropy: float = Field(default=DEFAULT_C_ENTROPY, description="Counting bound constant for the tail")


class OccupationsParams(StudyParams):
    samples: int = Field(default=100, description="Random sandwich instances per resolution")
    eps: List[float] = Field(default=[0.5, 1.0, 2.0], description="Sandwich epsilon scan")
    A_max: int = Field(default=10_000, description="Largest |A| in the mu-optimisation scan")
    q_max: int = Field(default=8, description="Largest q in the mu-optimisation scan")
    count_N: int = Field(default=20, description="Largest N in the ground-state identity")
    count_M: int = Field(default=27, description="Largest M in the ground-state identity")
    count_q: int = Field(default=4, description="Largest q in the ground-state identity")
    ell: float = Field(default=1.0, description="Box side for the occupation bound rows")
    kappa: float = Field(default=DEFAULT_KAPPA, description="Kinetic bound constant")
    energies: List[float] = Field(default=[0.5, 5.0, 50.0, 500.0], description="Energies for max_occupation")


class LedgerParams(StudyParams):
    N: List[int] = Field(default=[1000], description="Particle numbers")
    rho: List[float] = Field(default=[1.0], description="Densities")
    beta: List[float] = Field(default=[1.0], description="Inverse temperatures")
    q: int = Field(default=2, description="Spin states")
    c_delta: float = Field(default=DEFAULT_C_DELTA, description="Constant in the delta estimate")
    kappa: float = Field(default=DEFAULT_KAPPA, description="Kinetic bound constant")
    c_eta: float = Field(default=DEFAULT_C_ETA, description="Energy cutoff constant")
    c_entropy: float = Field(default=DEFAULT_C_ENTROPY, description="Counting bound constant")
    ell_prefactor: float = Field(default=DEFAULT_ELL_PREFACTOR, description="Prefactor of the box side")
    method: Literal["auto", "canonical", "legendre"] = Field(default="auto", description="Free-energy method")


PARAMS_MODELS: Dict[str, type[StudyParams]] = {
    "fermi": FermiParams,
    "hardy": HardyParams,
    "twobody": TwoBodyParams,
    "spectrum2": Spectrum2Params,
    "occupations": OccupationsParams,
    "ledger": LedgerParams,
}


class RunConfig(BaseModel):
    """Fully resolved configuration of one study run."""

    model_config = ConfigDict(extra="forbid")

    subcommand: Subcommand = Field(description="Study to run")
    params: Dict[str, Any] = Field(default_factory=dict, description="Study parameters, validated per subcommand")
    out: str = Field(default="results", description="Output directory")
    cache_dir: str | None = Field(default=None, description="Spectrum cache directory")
    seed: int = Field(default=DEFAULT_SEED, description="Seed for every random draw and iterative solver")
    eigen_tol: float = Field(default=EIGEN_TOL, description="Relative residual accepted from eigensolvers")

    @model_validator(mode="after")
    def _resolve_params(self) -> "RunConfig":
        model = PARAMS_MODELS[self.subcommand]
        self.params = model.model_validate(self.params).model_dump()
        return self

    def study_params(self) -> StudyParams:
        return PARAMS_MODELS[self.subcommand].model_validate(self.params)


class SummaryRecord(BaseModel):
    """Self-describing record written beside every CSV."""

    model_config = ConfigDict(extra="forbid")

    format_version: int = Field(default=CSV_FORMAT_VERSION, description="CSV/summary format version")
    config: Dict[str, Any] = Field(description="Resolved run configuration")
    passed: bool = Field(description="Whether every check passed")
    score: float = Field(description="Fraction of passed checks")
    checks: List[Dict[str, Any]] = Field(default_factory=list, description="Per-check margins and signals")
    artifacts: List[str] = Field(default_factory=list, description="Files written by the run")
    notes: str | None = Field(default=None, description="Optional free form message for humans")


RUN_CONFIG_JSON_SCHEMA: Dict[str, Any] = RunConfig.model_json_schema()
SUMMARY_JSON_SCHEMA: Dict[str, Any] = SummaryRecord.model_json_schema()

__all__ = [
    "FermiParams",
    "HardyParams",
    "LedgerParams",
    "OccupationsParams",
    "PARAMS_MODELS",
    "RUN_CONFIG_JSON_SCHEMA",
    "RunConfig",
    "SUMMARY_JSON_SCHEMA",
    "Spectrum2Params",
    "StudyParams",
    "Subcommand",
    "SummaryRecord",
    "TwoBodyParams",
]
