import math

import numpy as np
import pytest

from conftest import load_cases, make_id
from pointgas.errors import EmptySumError, InvalidArgumentError, SingularConfigurationError
from pointgas.geometry import OccupationVector, localization_stats, make_partition, sample_configuration
from pointgas.weight import (
    Configuration,
    effective_scattering_length,
    g_eval,
    g_lower_bound,
    g_upper_bound,
    scale_configuration,
)


@pytest.mark.parametrize("case", load_cases("g_eval"), ids=make_id)
def test_g_eval(case):
    c = Configuration(np.array(case["positions"], dtype=float))
    assert g_eval(c, case["a_inv"]) == pytest.approx(case["expected"], rel=1e-12)


def test_g_eval_coincident_points():
    with pytest.raises(SingularConfigurationError):
        g_eval(Configuration(np.zeros((2, 3))))


def test_g_eval_rejects_positive_inverse_length():
    c = Configuration(np.array([[0.0, 0, 0], [1.0, 0, 0]]))
    with pytest.raises(InvalidArgumentError):
        g_eval(c, 0.5)


def test_configuration_needs_two_particles():
    with pytest.raises(InvalidArgumentError):
        Configuration(np.zeros((1, 3)))


def test_g_is_homogeneous_of_degree_minus_one():
    rng = np.random.default_rng(3)
    c = Configuration(rng.random((5, 3)))
    for factor in (0.5, 2.0, 10.0):
        assert g_eval(scale_configuration(c, factor)) == pytest.approx(g_eval(c) / factor, rel=1e-12)


def test_bounds_bracket_g_on_localized_draws():
    rng = np.random.default_rng(11)
    for _ in range(100):
        m = int(rng.integers(2, 5))
        p = make_partition(1.0, m)
        N = int(rng.integers(2, 8))
        counts = np.bincount(rng.integers(0, p.M, size=N), minlength=p.M)
        n = OccupationVector(tuple(int(k) for k in counts))
        c = Configuration(sample_configuration(p, n, rng))
        g = g_eval(c)
        assert g_lower_bound(localization_stats(p, n), p.ell) <= g * (1 + 1e-12)
        assert g <= g_upper_bound(c, p, n) * (1 + 1e-12)


def test_upper_bound_particle_count_mismatch():
    p = make_partition(1.0, 2)
    c = Configuration(np.array([[0.1, 0.1, 0.1], [0.9, 0.9, 0.9]]))
    with pytest.raises(InvalidArgumentError):
        g_upper_bound(c, p, OccupationVector((3, 0, 0, 0, 0, 0, 0, 0)))


def test_effective_scattering_length_three_particles():
    c = Configuration(np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 2.0, 0]]))
    # the frozen pairs (0, 2) and (1, 2)
    inverse = 0.5 + 1.0 / math.sqrt(5.0)
    length = effective_scattering_length(c, 0, 1)
    assert length.inverse == pytest.approx(inverse)
    assert length.a_eff == pytest.approx(-1.0 / inverse)
    assert not length.unitary


def test_effective_scattering_length_counts_every_pair_in_a_inv():
    c = Configuration(np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 2.0, 0]]))
    plain = effective_scattering_length(c, 0, 1)
    shifted = effective_scattering_length(c, 0, 1, -0.25)
    assert shifted.inverse == pytest.approx(plain.inverse + 3 * 0.25)


def test_two_particles_are_unitary():
    c = Configuration(np.array([[0.0, 0, 0], [1.0, 0, 0]]))
    with pytest.raises(EmptySumError):
        effective_scattering_length(c, 0, 1)
    length = effective_scattering_length(c, 0, 1, allow_unitary=True)
    assert length.unitary
    assert length.a_eff == -math.inf


def test_effective_scattering_length_needs_distinct_indices():
    c = Configuration(np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 2.0, 0]]))
    with pytest.raises(InvalidArgumentError):
        effective_scattering_length(c, 1, 1)
