import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ozlab.errors import DomainError
from ozlab.lattice import LatticePath, unit_steps
from ozlab.weights import (WeightedPathModel, check_finite_energy, check_mixing, check_splitting,
                           iter_saws, saw_model)
from oracles import saw_counts


def test_saw_weight():
    m = saw_model(0.7, 2)
    p = LatticePath.from_steps([(1, 0), (0, 1)])
    assert m.weight(p) == math.exp(-1.4)
    with pytest.raises(DomainError):
        saw_model(0.0, 2)


@pytest.mark.parametrize("d,n", [(1, 6), (2, 6), (3, 4)])
def test_iter_saws_matches_brute_counts(d, n):
    got = {}
    for w in iter_saws(d, n):
        key = (w[-1], len(w) - 1)
        got[key] = got.get(key, 0) + 1
    assert got == saw_counts(d, n)


@pytest.mark.parametrize("beta", [0.3, 0.7, 0.8, 1.0, 2.0])
def test_saw_finite_energy_constant_is_beta(beta):
    rep = check_finite_energy(saw_model(beta, 2), 4, constant=beta)
    assert rep.constant == beta
    assert rep.passed


def test_saw_splitting_bounded_by_one():
    rep = check_splitting(saw_model(0.8, 2), 4, constant=1.0)
    assert rep.passed
    assert 0.0 < rep.constant <= 1.0


def test_saw_mixing_ratio_is_one():
    rep = check_mixing(saw_model(0.8, 2), 3)
    assert rep.passed
    assert rep.constant == 0.0
    assert rep.extra["max_ratio_deviation"] == 0.0


def test_mixing_rejects_bad_theta():
    with pytest.raises(DomainError):
        check_mixing(saw_model(0.8, 2), 2, theta=1.0)


def _bent_model(beta, gamma, d=2):
    """SAW with an extra cost per turn; conditional weights depend on the join."""

    def log_weight(p):
        steps = [tuple(b - a for a, b in zip(u, v)) for u, v in zip(p.vertices, p.vertices[1:])]
        turns = sum(1 for s, t in zip(steps, steps[1:]) if s != t)
        return -beta * len(p) - gamma * turns

    return WeightedPathModel("saw", d, unit_steps(d), log_weight,
                             lambda a, b: a.concat(b).is_self_avoiding(), {"beta": beta})


def test_finite_energy_general_model_sees_turn_cost():
    beta, gamma = 0.5, 0.3
    rep = check_finite_energy(_bent_model(beta, gamma), 4)
    # at most one turn per step of lam: its own corners plus the join
    assert rep.constant == pytest.approx(beta + gamma, rel=1e-12)


def test_mixing_general_model_detects_dependence():
    rep = check_mixing(_bent_model(0.5, 0.3), 3)
    assert rep.extra["max_ratio_deviation"] > 0.0


def test_report_json_fields():
    js = check_finite_energy(saw_model(1.0, 1), 3).to_json()
    assert {"axiom", "constant", "pass", "witness_paths", "instances"} <= set(js)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0))
def test_pass_flag_monotone_in_constant(c_lo, c_hi):
    c_lo, c_hi = sorted((c_lo, c_hi))
    m = saw_model(0.9, 1)
    if check_finite_energy(m, 3, constant=c_lo).passed:
        assert check_finite_energy(m, 3, constant=c_hi).passed
