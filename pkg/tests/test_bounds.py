import math

import numpy as np
import pytest

from conftest import load_cases, make_id
from pointgas.bounds import (
    assemble_ledger,
    boxes_for,
    calibrate_entropy_constant,
    calibrate_kappa,
    delta_estimate,
    ell_choice,
    entropy_bound,
    entropy_bound_boxes,
    entropy_tail_log,
    ground_state_count,
    ground_state_total,
    ground_state_totals,
    headline_deficit,
    kinetic_lower_bound,
    max_occupation,
    minimal_cutoff_scale,
    mu_opt_bound,
    mu_opt_constant,
    norm_sandwich_check,
    random_sandwich_case,
    sandwich_field,
    tail_cutoff_constant,
    tail_series_check,
    tail_sum_bound,
)
from pointgas.errors import InvalidArgumentError
from pointgas.freefermi import SpectrumSlice
from pointgas.geometry import OccupationVector, make_partition


@pytest.mark.parametrize("case", load_cases("mu_opt"), ids=make_id)
def test_mu_opt_bound(case):
    assert mu_opt_bound(case["A"], case["q"]) == case["expected"]


def test_mu_opt_constant_is_positive():
    scan = mu_opt_constant(A_max=2000, q_max=3)
    assert scan.c_star > 0
    A, q = scan.argmin
    assert A > q
    ratio = mu_opt_bound(A, q) * q ** (2 / 3) / (A - q) ** (5 / 3)
    assert ratio == pytest.approx(scan.c_star, rel=1e-12)


@pytest.mark.parametrize("case", load_cases("ground_state_count"), ids=make_id)
def test_ground_state_count(case):
    assert ground_state_count(case["n"], case["q"]) == case["expected"]


@pytest.mark.parametrize("q", [1, 2, 3])
@pytest.mark.parametrize("M", [1, 4, 9])
def test_ground_state_totals_match_binomial(q, M):
    totals = ground_state_totals(12, M, q)
    assert totals == [math.comb(q * M, N) for N in range(13)]


def test_ground_state_total_by_enumeration():
    from pointgas.geometry import enumerate_occupations

    brute = sum(ground_state_count(n, 2) for n in enumerate_occupations(5, 4))
    assert ground_state_total(5, 4, 2) == brute


def test_kinetic_bound_vanishes_up_to_q():
    assert kinetic_lower_bound([2, 1, 0, 2], q=2, ell=0.5) == 0.0


def test_calibrated_kappa_meets_the_energy():
    n = [5, 1, 3]
    kappa = calibrate_kappa(7.5, n, q=2, ell=0.3)
    assert kinetic_lower_bound(n, 2, 0.3, kappa) == pytest.approx(7.5, rel=1e-12)


def test_calibrate_kappa_needs_an_overfilled_box():
    with pytest.raises(InvalidArgumentError):
        calibrate_kappa(1.0, [1, 1], q=2, ell=1.0)


@pytest.mark.parametrize("E", [0.0, 0.5, 3.0, 40.0, 1e4])
@pytest.mark.parametrize("q", [1, 2])
def test_max_occupation_is_the_largest_admissible_count(E, q):
    bound = max_occupation(E, 0.7, q)
    assert bound.n_bar >= q
    assert kinetic_lower_bound([bound.n_bar + 1], q, 0.7) >= E
    if bound.n_bar > q:
        assert kinetic_lower_bound([bound.n_bar], q, 0.7) < E


@pytest.mark.parametrize("case", load_cases("max_occupation"), ids=make_id)
def test_max_occupation_at_the_threshold(case):
    bound = max_occupation(case["E"], case["ell"], case["q"], case["kappa"])
    assert bound.n_bar == case["n_bar"]
    assert bound.surrogate == pytest.approx(case["surrogate"], rel=1e-5)


@pytest.mark.parametrize("N, M, q", [(1, 4, 1), (5, 8, 2), (20, 30, 3), (7, 2.5, 4)])
def test_entropy_bound_boxes_holds(N, M, q):
    assert entropy_bound_boxes(N, M, q).holds


def test_entropy_bound_at_the_box_count():
    M = boxes_for(100, 1.0, 0.5)
    assert M == pytest.approx(800.0)
    boxes = entropy_bound_boxes(100, M, 2)
    assert boxes.log_binomial == pytest.approx(math.log(math.comb(1600, 100)), rel=1e-12)
    assert boxes.holds
    assert entropy_bound(4.0, 3, 2.0, 2, c=1.5) == pytest.approx(3 * math.log(12.0))


@pytest.mark.parametrize("beta, expected", [(1.0, 78.0 * math.exp(-3.0)), (2.0, 366.0 * math.exp(-6.0) / 8.0)])
def test_entropy_tail_log_closed_form(beta, expected):
    # N = 2: beta * int_3^inf E^3 exp(-beta E) dE
    assert math.exp(entropy_tail_log(beta, 3.0, 2, 1.0, 1, c=1.0)) == pytest.approx(expected, rel=1e-10)


def test_entropy_tail_log_far_tail_is_finite():
    value = entropy_tail_log(1.0, 1e4, 3, 1.0, 2)
    assert math.isfinite(value)
    assert value < -9000


def test_calibrated_entropy_constant_covers_every_level():
    levels = np.array([1.0, 2.0, 2.0, 3.0, 7.0])
    weights = np.array([1.0, 2.0, 1.0, 3.0, 5.0])
    c = calibrate_entropy_constant(levels, weights, 2, 1.0, 1, e_floor=1.0)
    for E in levels:
        count = weights[levels <= E].sum()
        assert count <= (c * E**1.5) ** 2 * (1 + 1e-12)
    assert c == pytest.approx(max(math.sqrt(weights[levels <= E].sum()) / E**1.5 for E in levels))


def _slice(levels, cutoff=10.0):
    levels = np.asarray(levels, dtype=float)
    return SpectrumSlice(levels, np.ones(levels.size, dtype=np.int64), "neumann", 1.0, cutoff, kind="modes")


def test_tail_sum_bound_true_tail():
    report = tail_sum_bound(1.0, 2.0, 2, _slice([0.0, 1.0, 2.0, 5.0]))
    assert report.true_tail == pytest.approx(math.exp(-2.0) + math.exp(-5.0))
    assert report.bound == pytest.approx(2 * math.exp(-1.0))
    assert report.complete
    assert report.margin > 0


def test_tail_sum_bound_weights_and_completeness():
    report = tail_sum_bound(1.0, 20.0, 4, [(_slice([0.0, 1.0]), 3.0)])
    assert report.true_tail == 0.0
    assert not report.complete
    assert report.applicable == (20.0 >= 4 * math.log(4))


def test_tail_series_fails_below_ln2():
    assert not tail_series_check(1.0, 0.5, 10, 1.0, 2).holds


@pytest.mark.parametrize("N", [10, 1000])
def test_tail_cutoff_constant_makes_the_series_hold(N):
    c_eta = tail_cutoff_constant(1.0, N, 1.0, 2)
    assert tail_series_check(1.0, c_eta * N * math.log(N), N, 1.0, 2).holds


@pytest.mark.parametrize("case", load_cases("delta"), ids=make_id)
def test_delta_estimate(case):
    N, rho, beta = case["N"], case["rho"], case["beta"]
    report = delta_estimate(N * math.log(N) / beta, ell_choice(N, rho), N, rho, case["q"], case["c"])
    assert report.first == pytest.approx(case["first"], rel=1e-3)
    assert report.second == pytest.approx(case["second"], rel=1e-3)
    assert report.delta == pytest.approx(case["delta"], rel=1e-3)
    assert report.first_dominates
    assert report.e_ell2_ok


def test_minimal_cutoff_scale():
    E0 = minimal_cutoff_scale(10.0, 0.01)
    assert E0 == pytest.approx(12.5)
    assert 10.0 + 2 * E0 * math.sqrt(0.01) == pytest.approx(E0)
    with pytest.raises(InvalidArgumentError):
        minimal_cutoff_scale(10.0, 0.25)


def test_ell_choice_scales_with_density():
    assert ell_choice(1000, 8.0) == pytest.approx(ell_choice(1000, 1.0) / 2)


def test_headline_deficit_per_particle_turns_over():
    small = [headline_deficit(N, 1.0) / N for N in (10**3, 10**4, 10**5, 10**6)]
    large = [headline_deficit(N, 1.0) / N for N in (10**32, 10**36, 10**40, 10**44)]
    assert small == sorted(small)
    assert large == sorted(large, reverse=True)


def test_sandwich_holds_on_random_cases():
    rng = np.random.default_rng(5)
    for _ in range(3):
        case = random_sandwich_case(rng, 0, max_m=2)
        report = norm_sandwich_check(case.psi, case.occupation, case.partition, 0.5)
        assert report.passed


def test_sandwich_rejects_field_outside_boxes():
    p = make_partition(2.0, 2)
    n = OccupationVector((1, 1, 0, 0, 0, 0, 0, 0))
    other = OccupationVector((1, 0, 0, 0, 0, 0, 0, 1))
    psi = sandwich_field(p, other, 2, lambda *x: 1.0 + 0.0 * sum(x))
    with pytest.raises(InvalidArgumentError):
        norm_sandwich_check(psi, n, p, 0.5)


def test_ledger_is_invariant_under_scaling():
    base = assemble_ledger(1.0, 8, 1.0, 2)
    scaled = assemble_ledger(4.0, 8, 1.0 / 8.0, 2)
    assert scaled.m == base.m
    assert scaled.delta.delta == pytest.approx(base.delta.delta, rel=1e-9)
    assert scaled.F_free == pytest.approx(base.F_free / 4, rel=1e-9)
    assert scaled.F_localized == pytest.approx(base.F_localized / 4, rel=1e-9)


def test_ledger_with_large_delta_names_the_blocking_term():
    ledger = assemble_ledger(1.0, 8, 1.0, 2, c_delta=10.0)
    assert not ledger.feasible
    assert ledger.blocking in ("first", "second")
    assert ledger.F_lower is None


def test_ledger_at_a_thousand_particles():
    ledger = assemble_ledger(1.0, 1000, 1.0, 2)
    assert ledger.feasible
    assert ledger.consistent
    assert ledger.F_lower <= ledger.F_localized <= ledger.F_free
