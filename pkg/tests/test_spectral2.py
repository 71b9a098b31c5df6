import math

import numpy as np
import pytest

import pointgas.spectral2 as spectral2
from config import EIGEN_TOL
from conftest import load_cases, make_id
from pointgas.errors import BudgetExceededError, InvalidArgumentError
from pointgas.freefermi import cube_spectrum
from pointgas.spectral2 import (
    RadialProblem,
    TwoBodyBoxProblem,
    assemble_two_body,
    boundary_term_check,
    cell_pair_average,
    discrete_pair_free_energy,
    interacting_free_energy,
    lowest_modes,
    radial_exact_levels,
    radial_form_energy,
    radial_spectrum,
    sector_degeneracy,
    sector_spectrum,
    single_particle_levels,
    single_particle_matrices,
    solve_lowest,
)


def test_unitary_exact_levels():
    levels = radial_exact_levels(0.0, 1.0, 3)
    assert levels == pytest.approx([(0.5 * math.pi) ** 2, (1.5 * math.pi) ** 2, (2.5 * math.pi) ** 2])


def test_exact_levels_solve_the_secular_equation():
    a_inv, R = -0.7, 2.0
    levels = radial_exact_levels(a_inv, R, 4)
    for j, E in enumerate(levels, start=1):
        s = math.sqrt(E)
        assert (j - 0.5) * math.pi / R < s < j * math.pi / R
        assert s * math.cos(s * R) == pytest.approx(a_inv * math.sin(s * R), abs=1e-10)


@pytest.mark.parametrize("a_inv", [0.0, -1.0])
def test_radial_spectrum_converges(a_inv):
    spec = radial_spectrum(RadialProblem(a_inv, 1.0, 400, "dirichlet"), 5)
    exact = radial_exact_levels(a_inv, 1.0, 5)
    assert np.max(np.abs(spec.eigenvalues - exact) / exact) <= 1e-3


@pytest.mark.parametrize("case", load_cases("radial_refinement"), ids=make_id)
def test_nested_radial_meshes_lower_every_level(case):
    spectra = [
        radial_spectrum(RadialProblem(case["a_inv"], 1.0, cells, case["outer"]), 3).eigenvalues
        for cells in case["cells"]
    ]
    for coarse, fine in zip(spectra, spectra[1:]):
        assert np.all(fine <= coarse + 1e-10 * np.maximum(np.abs(coarse), 1.0))


@pytest.mark.parametrize("walls", ["dirichlet", "neumann"])
def test_box_pair_levels_rise_towards_the_continuum(walls):
    # cell-centred levels 4/h^2 sin^2(k pi / 2n) sit below (k pi / L)^2
    spec = cube_spectrum(1.0, walls, 7 * math.pi**2)
    states = np.repeat(spec.eigenvalues, spec.multiplicities)
    continuum = states[0] + states[1]
    grounds = []
    for n in (2, 4, 8):
        lam = single_particle_levels(n, 1.0, walls)
        grounds.append(lam[0] + lam[1])
    assert grounds[0] < grounds[1] < grounds[2] < continuum


def test_lobpcg_branch_reproduces_the_neumann_levels():
    # 17^3 = 4913 cells, above the dense limit
    K, M = single_particle_matrices(17, 1.0, "neumann")
    assert K.shape[0] > spectral2.DENSE_EIGEN_LIMIT
    modes = lowest_modes(K, M, 4, kind="cells", bc="neumann", side=1.0)
    assert modes.eigenvalues == pytest.approx(single_particle_levels(17, 1.0, "neumann")[:4], rel=1e-5, abs=1e-5)
    assert modes.residuals.max() <= EIGEN_TOL
    assert (modes.kind, modes.bc, modes.side) == ("cells", "neumann", 1.0)
    assert modes.cutoff == modes.eigenvalues[-1]
    continuum = cube_spectrum(1.0, "neumann", 1.5 * math.pi**2)
    expected = np.repeat(continuum.eigenvalues, continuum.multiplicities)[:4]
    assert modes.eigenvalues == pytest.approx(expected, rel=5e-3, abs=1e-5)


def test_shift_moves_every_level():
    K, M = single_particle_matrices(5, 1.0, "neumann")
    base = lowest_modes(K, M, 6).eigenvalues
    for c in (3.5, -2.0):
        shifted = lowest_modes(K + c * M, M, 6).eigenvalues
        assert shifted == pytest.approx(base + c, rel=1e-9, abs=1e-9)


def test_iterative_and_dense_paths_agree(monkeypatch):
    K, M = assemble_two_body(TwoBodyBoxProblem(1.0, 2, 4, "antisymmetric", "dirichlet"))
    dense, _, _ = solve_lowest(K, M, 5)
    monkeypatch.setattr(spectral2, "DENSE_EIGEN_LIMIT", 100)
    values, vectors, residuals = solve_lowest(K, M, 5, seed=3)
    assert vectors.shape == (K.shape[0], 5)
    assert residuals.max() <= EIGEN_TOL
    assert values == pytest.approx(dense, rel=1e-6)


def test_free_pair_levels_on_an_iterative_grid():
    p = TwoBodyBoxProblem(1.0, 1, 6, "antisymmetric", "dirichlet", weighted=False)
    assert p.unknowns > spectral2.DENSE_EIGEN_LIMIT
    K, M = assemble_two_body(p)
    modes = lowest_modes(K, M, 4)
    lam = single_particle_levels(6, 1.0, "dirichlet")
    i, j = np.triu_indices(lam.size, k=1)
    expected = np.sort(lam[i] + lam[j])[:4]
    assert modes.eigenvalues == pytest.approx(expected, rel=1e-6)
    assert modes.residuals.max() <= EIGEN_TOL


def test_radial_spectrum_needs_enough_cells():
    with pytest.raises(InvalidArgumentError):
        radial_spectrum(RadialProblem(0.0, 1.0, 10, "dirichlet"), 3)


def test_radial_problem_rejects_positive_inverse_length():
    with pytest.raises(InvalidArgumentError):
        RadialProblem(0.5, 1.0, 10)


def test_neumann_zero_mode():
    p = RadialProblem(-0.5, 1.0, 40, "neumann")
    assert abs(radial_form_energy(p, np.ones(41))) <= 1e-10
    assert radial_form_energy(p, lambda r: r) > 0


def _cosine(r):
    return math.cos(0.5 * math.pi * r)


def _cosine_slope(r):
    return -0.5 * math.pi * math.sin(0.5 * math.pi * r)


def _vanishing(r):
    return r * _cosine(r)


def _vanishing_slope(r):
    return _cosine(r) + r * _cosine_slope(r)


@pytest.mark.parametrize("a_inv", [0.0, -0.8])
@pytest.mark.parametrize("eps", [1e-1, 1e-2])
def test_boundary_identities(a_inv, eps):
    p = RadialProblem(a_inv, 1.0, 40, "dirichlet")
    report = boundary_term_check(p, _cosine, _cosine_slope, eps)
    scale = max(abs(report.whole_space), abs(report.form), 1.0)
    assert abs(report.whole_space_residual) <= 1e-8 * scale
    assert abs(report.substituted_residual) <= 1e-8 * scale


def test_sphere_term_vanishes_for_profiles_below_square_root():
    p = RadialProblem(-0.3, 1.0, 40, "dirichlet")
    epsilons = (1e-1, 1e-2, 1e-3)
    vanishing = [boundary_term_check(p, _vanishing, _vanishing_slope, eps).inner_sphere for eps in epsilons]
    assert vanishing[0] > vanishing[1] > vanishing[2]
    finite = [boundary_term_check(p, _cosine, _cosine_slope, eps).inner_sphere for eps in epsilons]
    assert finite[0] < finite[1] < finite[2]


def test_single_particle_levels_match_matrices():
    K, M = single_particle_matrices(3, 2.0, "dirichlet")
    values, _, _ = solve_lowest(K, M, 27)
    assert values == pytest.approx(single_particle_levels(3, 2.0, "dirichlet"), rel=1e-10)


def test_neumann_single_particle_ground_state():
    levels = single_particle_levels(4, 1.0, "neumann")
    assert levels[0] == 0.0
    assert levels.size == 64


def test_sector_degeneracy():
    assert sector_degeneracy(1, "symmetric") == 0
    assert sector_degeneracy(1, "antisymmetric") == 1
    assert sector_degeneracy(2, "symmetric") == 1
    assert sector_degeneracy(2, "antisymmetric") == 3


@pytest.mark.parametrize("sector", ["symmetric", "antisymmetric"])
def test_unweighted_sectors_are_sums_of_single_levels(sector):
    spec = sector_spectrum(TwoBodyBoxProblem(1.0, 2, 2, sector, "dirichlet", weighted=False), 1000.0)
    lam = single_particle_levels(2, 1.0, "dirichlet")
    i, j = np.triu_indices(lam.size, k=0 if sector == "symmetric" else 1)
    expected = np.sort(lam[i] + lam[j])
    assert spec.eigenvalues == pytest.approx(expected, rel=1e-8)
    assert spec.meta["complete"]


def test_weighted_symmetric_sector_has_a_zero_mode():
    spec = sector_spectrum(TwoBodyBoxProblem(1.0, 2, 2, "symmetric", "neumann"), 100.0)
    assert abs(spec.eigenvalues[0]) <= 1e-8
    assert spec.eigenvalues[1] > 1e-3


def test_assembled_sizes():
    p = TwoBodyBoxProblem(1.0, 2, 3, "antisymmetric")
    K, M = assemble_two_body(p)
    assert K.shape == M.shape == (p.unknowns, p.unknowns)
    assert p.unknowns == 27 * 26 // 2
    assert np.all(M.diagonal() > 0)


def test_two_body_budget():
    with pytest.raises(BudgetExceededError) as info:
        assemble_two_body(TwoBodyBoxProblem(1.0, 2, 15, "symmetric"))
    assert info.value.suggested_cells == 14


def test_cell_pair_average_symmetry_and_decay():
    assert cell_pair_average((1, 0, 0)) == pytest.approx(cell_pair_average((0, -1, 0)), rel=1e-8)
    assert cell_pair_average((0, 0, 0)) > cell_pair_average((1, 1, 0)) > 0
    assert cell_pair_average((5, 0, 0)) == pytest.approx(1 / 25, rel=2e-2)


def test_unweighted_free_energy_matches_closed_form():
    estimate = interacting_free_energy(1.0, 1.0, 2, 2, 1e4, walls="dirichlet", weighted=False)
    assert estimate.value == pytest.approx(discrete_pair_free_energy(1.0, 1.0, 2, 2, "dirichlet"), rel=1e-9)
    assert estimate.lower <= estimate.upper
    assert estimate.levels == {"symmetric": 36, "antisymmetric": 28}


def test_low_cutoff_reports_an_interval():
    estimate = interacting_free_energy(0.01, 1.0, 2, 2, 50.0, walls="neumann")
    assert estimate.value is None
    assert estimate.lower < estimate.upper
