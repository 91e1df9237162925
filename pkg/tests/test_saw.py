import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ozlab.errors import ContractViolation, DataError, ResourceError, UnsupportedModelError
from ozlab.lattice import dual
from ozlab.saw import (classified_counts, decay_rate_estimate, enumerate_two_point, ratio_decay,
                       ray_sums, tilted_susceptibility)
from ozlab.weights import WeightedPathModel, saw_model
from oracles import piece_classes, saw_counts, saw_vertex_lists

# square-lattice SAW counts c_n, n = 0..14 (standard series)
SQUARE_COUNTS = [1, 4, 12, 36, 100, 284, 780, 2172, 5916, 16268, 44100, 120292, 324932,
                 881500, 2374444]
# simple cubic counts, n = 0..8
CUBIC_COUNTS = [1, 6, 30, 150, 726, 3534, 16926, 81390, 387966]


def test_square_walk_counts():
    assert enumerate_two_point(saw_model(1.0, 2), 14).walk_counts() == SQUARE_COUNTS


def test_cubic_walk_counts():
    assert enumerate_two_point(saw_model(1.0, 3), 8).walk_counts() == CUBIC_COUNTS


def test_one_dimensional_table():
    tab = enumerate_two_point(saw_model(0.9, 1), 30)
    assert tab.walk_counts() == [1] + [2] * 30
    for x in range(-30, 31):
        assert tab.g((x,)) == math.exp(-0.9 * abs(x))


@pytest.mark.parametrize("d,N", [(2, 7), (3, 4)])
def test_per_endpoint_counts_match_brute(d, N):
    beta = 0.6
    tab = enumerate_two_point(saw_model(beta, d), N)
    brute = saw_counts(d, N)
    assert tab.series.as_dict() == {k: c * math.exp(-beta * k[1]) for k, c in brute.items()}


@pytest.mark.parametrize("t", [(1.0, 0.0), (1.0, 0.5), (0.3, -1.0)])
def test_piece_classes_match_definition(t):
    N = 8
    got = classified_counts(2, N, dual(*t))
    want = np.zeros_like(got)
    names = ("bulk", "left", "right", "nocut")
    for w in saw_vertex_lists(2, N):
        proj = [t[0] * v[0] + t[1] * v[1] for v in w]
        for c in piece_classes(proj):
            want[(names.index(c), len(w) - 1, w[-1][0] + N, w[-1][1] + N)] += 1
    assert np.array_equal(got, want)


def test_caps_and_model_checks():
    with pytest.raises(ResourceError):
        enumerate_two_point(saw_model(1.0, 2), 21)
    with pytest.raises(ContractViolation):
        enumerate_two_point(saw_model(1.0, 2), -1)
    other = WeightedPathModel("other", 2, (), lambda p: 0.0, lambda a, b: True, {"beta": 1.0})
    with pytest.raises(UnsupportedModelError):
        enumerate_two_point(other, 4)


def test_tilted_susceptibility_1d():
    beta, s, N = 1.0, 0.4, 20
    tab = enumerate_two_point(saw_model(beta, 1), N)
    want = 1 + sum(math.exp(-beta * n) * 2 * math.cosh(s * n) for n in range(1, N + 1))
    assert tilted_susceptibility(tab, (s,)) == pytest.approx(want, rel=1e-14)


def test_decay_rate_1d_is_beta():
    for beta in (0.5, 1.0, 1.7):
        est = decay_rate_estimate(enumerate_two_point(saw_model(beta, 1), 40), (1,))
        assert est.value == pytest.approx(beta, abs=1e-12)
        assert est.lower <= beta + 1e-12 and est.upper >= beta - 1e-12


def test_ratio_decay_pure_exponential_with_prefactor():
    vals = {k: k ** -0.5 * math.exp(-0.7 * k) for k in range(1, 8)}
    est = ratio_decay(vals, prefactor=0.5)
    assert est.value == pytest.approx(0.7, abs=1e-13)
    assert est.width < 1e-13


def test_ratio_decay_needs_three_points():
    with pytest.raises(DataError):
        ratio_decay({1: 1.0, 2: 0.5})


def test_ray_sums_share_excess_budget():
    # lookup with one walk per length of correct parity: G(k) counts kept shells
    prof = lambda x: [1.0 if n >= sum(map(abs, x)) and (n - sum(map(abs, x))) % 2 == 0 else 0.0
                      for n in range(15)]
    vals = ray_sums(prof, (1, 0), 14)
    assert sorted(vals) == [1, 2, 3, 4, 5, 6, 7]
    assert len(set(vals.values())) == 1


def test_decay_rate_2d_axis_brackets_sensibly():
    est = decay_rate_estimate(enumerate_two_point(saw_model(2.0, 2), 14), (1, 0))
    # straight walks give xi <= beta; counting all walks gives xi >= beta - log(mu)
    mu = 2.638
    assert 2.0 - math.log(mu) < est.lower <= est.value <= est.upper <= 2.0


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.sampled_from([0, 1, 2, 3, 4, 5, 6, 7]))
def test_g_has_lattice_symmetry(x, sym):
    tab = enumerate_two_point(saw_model(0.9, 2), 10)
    a, b = x
    images = [(a, b), (-a, b), (a, -b), (-a, -b), (b, a), (-b, a), (b, -a), (-b, -a)]
    assert tab.g(images[sym]) == tab.g(x)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([(1, 0), (-1, 0), (0, 1)]), st.sampled_from([1.2, 1.5, 2.0]))
def test_decay_subadditive(direction, beta):
    tab = enumerate_two_point(saw_model(beta, 2), 14)
    one = decay_rate_estimate(tab, direction)
    two = decay_rate_estimate(tab, tuple(2 * c for c in direction))
    assert two.lower <= 2 * one.upper + 1e-9
