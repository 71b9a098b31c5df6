import math

import numpy as np
import pytest

from conftest import load_cases, make_id
from pointgas.errors import InvalidArgumentError
from pointgas.geometry import (
    OccupationVector,
    box_distance,
    box_of,
    count_occupations,
    enumerate_occupations,
    localization_stats,
    make_partition,
    neighbor_counts,
    neighbor_pair_sum,
    neighborhoods,
    sample_configuration,
)


def _index(m, corner):
    return (corner[0] * m + corner[1]) * m + corner[2]


def _occupation(M, filled):
    counts = [0] * M
    for j, c in filled.items():
        counts[j] = c
    return OccupationVector(tuple(counts))


def test_partition_shape():
    p = make_partition(1.0, 2)
    assert p.M == 8
    assert p.ell == 0.5
    assert p.corners[1].tolist() == [0, 0, 1]


@pytest.mark.parametrize("L, m", [(0.0, 2), (-1.0, 3), (1.0, 1), (1.0, 2.5)])
def test_partition_rejects_bad_arguments(L, m):
    with pytest.raises(InvalidArgumentError):
        make_partition(L, m)


@pytest.mark.parametrize("case", load_cases("box_distance"), ids=make_id)
def test_box_distance(case):
    p = make_partition(3.0, case["m"])
    j, k = _index(case["m"], case["j"]), _index(case["m"], case["k"])
    assert box_distance(p, j, k) == pytest.approx(case["expected_units"] * p.ell)
    assert box_distance(p, k, j) == box_distance(p, j, k)


def test_box_distance_index_out_of_range():
    with pytest.raises(InvalidArgumentError):
        box_distance(make_partition(1.0, 2), 0, 8)


def test_neighbor_counts_all_in_one_box():
    p = make_partition(3.0, 3)
    n = _occupation(p.M, {0: 4})
    counts = neighbor_counts(p, n)
    assert counts[0] == 0
    for k in range(1, p.M):
        touching = max(abs(int(c)) for c in p.corners[k]) == 1
        assert counts[k] == (4 if touching else 0)


def test_neighbor_counts_two_by_two_all_adjacent():
    p = make_partition(1.0, 2)
    assert neighbor_counts(p, OccupationVector((1,) * 8)) == [7] * 8


def test_neighbor_counts_centre_box():
    p = make_partition(3.0, 3)
    centre = _index(3, (1, 1, 1))
    counts = neighbor_counts(p, _occupation(p.M, {centre: 1}))
    assert sum(counts) == 26
    assert counts[centre] == 0


def test_neighbor_counts_mismatch():
    with pytest.raises(InvalidArgumentError):
        neighbor_counts(make_partition(1.0, 2), OccupationVector((1, 1)))


def test_stats_single_box():
    p = make_partition(2.0, 2)
    stats = localization_stats(p, _occupation(p.M, {3: 5}))
    assert stats.K_minus == 0.0
    assert stats.K_plus == 0.0
    assert stats.V == 20


def test_stats_distant_singletons():
    p = make_partition(3.0, 3)
    far = _index(3, (2, 2, 2))
    stats = localization_stats(p, _occupation(p.M, {0: 1, far: 1}))
    d = math.sqrt(3.0) * p.ell
    assert stats.K_minus == pytest.approx(1.0 / (d + 2 * math.sqrt(3.0) * p.ell))
    assert stats.K_plus == pytest.approx(1.0 / d)
    assert stats.V == 0


def test_stats_against_explicit_pair_sum():
    p = make_partition(4.0, 4)
    n = _occupation(p.M, {0: 2, _index(4, (2, 0, 0)): 3, _index(4, (3, 3, 3)): 1, _index(4, (1, 0, 0)): 1})
    stats = localization_stats(p, n)
    k_minus = k_plus = 0.0
    occupied = [j for j, c in enumerate(n.counts) if c]
    for a, j in enumerate(occupied):
        for k in occupied[a + 1 :]:
            d = box_distance(p, j, k)
            if d > 0:
                k_minus += n.counts[j] * n.counts[k] / (d + 2 * math.sqrt(3.0) * p.ell)
                k_plus += n.counts[j] * n.counts[k] / d
    m = neighbor_counts(p, n)
    assert stats.K_minus == pytest.approx(k_minus, rel=1e-12)
    assert stats.K_plus == pytest.approx(k_plus, rel=1e-12)
    assert stats.V == sum(c * (c + mj - 1) for c, mj in zip(n.counts, m))


def test_stats_bracket_on_random_occupations():
    rng = np.random.default_rng(7)
    for _ in range(200):
        m = int(rng.integers(2, 5))
        p = make_partition(1.0, m)
        N = int(rng.integers(1, 13))
        counts = np.bincount(rng.integers(0, p.M, size=N), minlength=p.M)
        n = OccupationVector(tuple(int(c) for c in counts))
        stats = localization_stats(p, n)
        assert stats.K_minus <= stats.K_plus
        if stats.K_minus > 0:
            assert stats.K_plus <= (1 + 2 * math.sqrt(3.0)) * stats.K_minus * (1 + 1e-12)
        m_neigh = neighbor_counts(p, n)
        assert sum(c * mj for c, mj in zip(n.counts, m_neigh)) == 2 * neighbor_pair_sum(p, n)


def test_neighborhood_sizes():
    p = make_partition(3.0, 3)
    n = _occupation(p.M, {0: 2, 1: 1, _index(3, (2, 2, 2)): 1})
    sizes = [len(s) for s in neighborhoods(p, n)]
    m = neighbor_counts(p, n)
    boxes = n.box_of_particle()
    assert sizes == [n.counts[b] + m[b] - 1 for b in boxes]


@pytest.mark.parametrize("case", load_cases("enumerate"), ids=make_id)
def test_enumerate_occupations(case):
    got = [list(n.counts) for n in enumerate_occupations(case["N"], case["M"], case["cap"])]
    assert got == case["expected"]


@pytest.mark.parametrize("case", load_cases("count"), ids=make_id)
def test_count_occupations(case):
    assert count_occupations(case["N"], case["M"], case["cap"]) == case["expected"]
    if case["expected"] < 100_000:
        assert sum(1 for _ in enumerate_occupations(case["N"], case["M"], case["cap"])) == case["expected"]


def test_sample_configuration_lands_in_boxes():
    p = make_partition(2.0, 3)
    n = _occupation(p.M, {0: 2, 13: 1, 26: 1})
    x = sample_configuration(p, n, np.random.default_rng(1))
    assert x.shape == (4, 3)
    assert [box_of(p, row) for row in x] == n.box_of_particle().tolist()


def test_box_of_rejects_outside_point():
    with pytest.raises(InvalidArgumentError):
        box_of(make_partition(1.0, 2), (1.5, 0.0, 0.0))
