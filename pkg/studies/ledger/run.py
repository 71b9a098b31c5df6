from __future__ import annotations

import itertools
import logging
import math
from typing import Any, Dict, List

from core.schema import LedgerParams
from pointgas.bounds import (
    assemble_ledger,
    delta_estimate,
    ell_choice,
    headline_deficit,
    tail_cutoff_constant,
    tail_series_check,
)
from studies.context import StudyContext, StudyOutput

logger = logging.getLogger(__name__)

DELTA_LADDER = (10**3, 10**6, 10**9)
# the per-particle deficit N^(-1/63) (ln N)^(23/21) only falls once ln N > 69
DEFICIT_LADDER = (10**32, 10**36, 10**40, 10**44)
SMALL_N_LADDER = (10**3, 10**4, 10**5, 10**6)


def record_name(N: int, rho: float, beta: float) -> str:
    return f"ledger_N{N}_rho{rho:g}_beta{beta:g}"


def _ledger_rows(params: LedgerParams) -> tuple[List[Dict[str, Any]], Dict[str, Any]]:
    rows, records = [], {}
    for N, rho, beta in itertools.product(params.N, params.rho, params.beta):
        ledger = assemble_ledger(
            beta,
            N,
            rho,
            params.q,
            c_delta=params.c_delta,
            kappa=params.kappa,
            c_eta=params.c_eta,
            ell_prefactor=params.ell_prefactor,
            method=params.method,
        )
        series = tail_series_check(beta, ledger.E_bar, N, rho, params.q, params.c_entropy)
        records[record_name(N, rho, beta)] = ledger
        rows.append(
            {
                "N": N,
                "rho": rho,
                "beta": beta,
                "q": params.q,
                "L": ledger.L,
                "m": ledger.m,
                "ell": ledger.ell,
                "E_bar": ledger.E_bar,
                "delta": ledger.delta.delta,
                "delta_first": ledger.delta.first,
                "delta_second": ledger.delta.second,
                "E0": ledger.E0,
                "finite_size_defect": ledger.terms["finite_size_defect"],
                "norm_penalty": ledger.terms["norm_penalty"],
                "tail_term": ledger.terms["tail_term"],
                "F_localized": ledger.F_localized,
                "F_free": ledger.F_free,
                "F_lower": ledger.F_lower,
                "headline_deficit": ledger.headline_deficit,
                "n_bar": ledger.n_bar,
                "blocking": ledger.blocking,
                "feasible": ledger.feasible,
                "consistent": ledger.consistent,
                "tail_series_holds": series.holds,
                "c_eta_min": tail_cutoff_constant(beta, N, rho, params.q, params.c_entropy),
            }
        )
    return rows, records


def _delta_ladder(params: LedgerParams) -> List[Dict[str, Any]]:
    rows = []
    rho, beta = params.rho[0], params.beta[0]
    for N in DELTA_LADDER:
        ell = ell_choice(N, rho, params.ell_prefactor)
        E_bar = params.c_eta * N * math.log(N) / beta
        report = delta_estimate(E_bar, ell, N, rho, params.q, params.c_delta)
        rows.append(
            {
                "N": N,
                "ell": ell,
                "delta": report.delta,
                "first": report.first,
                "second": report.second,
                "smallness_ratio": report.smallness_ratio,
            }
        )
    return rows


def _deficit_ladder(params: LedgerParams, ladder: tuple[int, ...], label: str) -> List[Dict[str, Any]]:
    rho = params.rho[0]
    return [
        {
            "ladder": label,
            "N": N,
            "deficit": headline_deficit(N, rho, params.c_eta),
            "per_particle": headline_deficit(N, rho, params.c_eta) / N,
        }
        for N in ladder
    ]


def run(params: LedgerParams, ctx: StudyContext) -> StudyOutput:
    rows, records = _ledger_rows(params)
    infeasible = [r["N"] for r in rows if not r["feasible"]]
    if infeasible:
        logger.warning("no admissible E0 for N in %s", infeasible)
    return StudyOutput(
        rows,
        tables={
            "delta": _delta_ladder(params),
            "deficit": _deficit_ladder(params, DEFICIT_LADDER, "large") + _deficit_ladder(params, SMALL_N_LADDER, "small"),
        },
        records=records,
    )


__all__ = ["DEFICIT_LADDER", "DELTA_LADDER", "SMALL_N_LADDER", "record_name", "run"]
