import math

import numpy as np
import pytest

from pointgas.errors import InfeasibleOccupationError, InvalidArgumentError, SpectrumTooLargeError
from pointgas.freefermi import (
    SpectrumSlice,
    canonical_free_energy,
    cube_free_energy,
    cube_spectrum,
    density,
    f_density,
    fit_defect_constant,
    grand_canonical_free_energy,
    localized_free_energy,
    slater_free_energy,
    zero_temperature_density,
)
from pointgas.geometry import make_partition


def _modes(levels, cutoff=None):
    levels = np.asarray(levels, dtype=float)
    top = float(levels[-1]) if cutoff is None else cutoff
    return SpectrumSlice(levels, np.ones(levels.size, dtype=np.int64), "neumann", math.nan, top, kind="modes")


def test_neumann_cube_levels():
    spec = cube_spectrum(1.0, "neumann", 15.0)
    unit = math.pi**2
    assert spec.eigenvalues[0] == 0.0
    assert spec.eigenvalues[1] == pytest.approx(unit)
    assert spec.multiplicities[:2].tolist() == [1, 3]


def test_dirichlet_cube_levels():
    spec = cube_spectrum(2.0, "dirichlet", 2 * math.pi**2)
    unit = (math.pi / 2.0) ** 2
    assert spec.eigenvalues[0] == pytest.approx(3 * unit)
    assert spec.eigenvalues[1] == pytest.approx(6 * unit)
    assert spec.multiplicities[:2].tolist() == [1, 3]


def test_copies_multiply_degeneracy():
    spec = cube_spectrum(1.0, "neumann", 15.0, copies=8)
    assert spec.state_count == 8 * 4
    assert spec.count_below(1.0) == 8


def test_cube_spectrum_size_guard():
    with pytest.raises(SpectrumTooLargeError):
        cube_spectrum(1.0, "dirichlet", 1e6, max_index=1000)


def test_cube_spectrum_rejects_unknown_boundary():
    with pytest.raises(InvalidArgumentError):
        cube_spectrum(1.0, "periodic", 10.0)


def test_slice_must_be_sorted():
    with pytest.raises(InvalidArgumentError):
        SpectrumSlice(np.array([1.0, 0.0]), np.array([1, 1]), "neumann", 1.0, 2.0)


def test_two_fermions_on_two_levels():
    eps = 0.37
    spec = _modes([0.0, eps])
    assert canonical_free_energy(spec, 1, 2, 1.3) == pytest.approx(eps, rel=1e-12)


def test_overfilled_spectrum():
    with pytest.raises(InfeasibleOccupationError):
        canonical_free_energy(_modes([0.0, 1.0]), 1, 3, 1.0)
    with pytest.raises(InfeasibleOccupationError):
        slater_free_energy(_modes([0.0, 1.0]), 1, 3, 1.0)


@pytest.mark.parametrize("q", [1, 2, 3])
@pytest.mark.parametrize("N", [1, 3, 5])
@pytest.mark.parametrize("beta", [0.2, 1.0, 5.0])
def test_canonical_recursion_matches_enumeration(q, N, beta):
    rng = np.random.default_rng(17)
    spec = _modes(np.sort(rng.uniform(0.0, 4.0, size=8)), cutoff=4.0)
    assert canonical_free_energy(spec, q, N, beta) == pytest.approx(
        slater_free_energy(spec, q, N, beta), rel=1e-10, abs=1e-10
    )


def test_legendre_bound_is_below_canonical():
    spec = cube_spectrum(1.0, "neumann", 400.0)
    for N in (2, 6, 12):
        assert grand_canonical_free_energy(spec, 2, N, 0.5) <= canonical_free_energy(spec, 2, N, 0.5) + 1e-9


def test_free_energy_density_scaling():
    beta, rho, q = 2.0, 3.0, 2
    direct = f_density(beta, rho, q).f
    scaled = rho ** (5.0 / 3.0) * f_density(beta * rho ** (2.0 / 3.0), 1.0, q).f
    assert direct == pytest.approx(scaled, rel=1e-6)


def test_chemical_potential_reproduces_density():
    point = f_density(1.5, 0.8, 2)
    assert density(1.5, point.mu, 2) == pytest.approx(0.8, rel=1e-8)
    assert point.f == pytest.approx(point.mu * 0.8 - point.pressure)


@pytest.mark.parametrize("q", [1, 2])
def test_low_temperature_limit(q):
    low = f_density(50.0, 1.0, q).f
    assert low == pytest.approx(zero_temperature_density(1.0, q), rel=1e-2)


def test_f_density_rejects_zero_density():
    with pytest.raises(InvalidArgumentError):
        f_density(1.0, 0.0, 2)


def test_neumann_boxes_lower_the_free_energy():
    p = make_partition(1.0, 2)
    localized = localized_free_energy(1.0, 4, p, 2)
    whole_neumann = cube_free_energy(1.0, 4, 1.0, 2, "neumann")
    whole_dirichlet = cube_free_energy(1.0, 4, 1.0, 2, "dirichlet")
    assert localized <= whole_neumann <= whole_dirichlet


def test_defect_fit_against_dirichlet_cube():
    fit = fit_defect_constant(1.0, 4, 1.0, 2, [2, 3])
    assert all(d > 0 for d in fit.defects)
    assert fit.c_eta == max(fit.ratios)
    assert fit.ells == pytest.approx((0.5, 1.0 / 3.0))
