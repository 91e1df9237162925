import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ozlab.coarse import (XiNorm, break_points, build_skeleton, on_boundary, surcharge,
                          surcharge_histogram)
from ozlab.errors import ContractViolation, DomainError, ResourceError
from ozlab.lattice import LatticePath, dual
from ozlab.renewal import regeneration_points
from ozlab.weights import saw_model
from ozlab.wulff import WulffBody


def body_1d(beta=1.0):
    return WulffBody(1, [(1.0,), (-1.0,)], [(beta,), (-beta,)], beta=beta)


def euclid_body(r=1.0):
    # xi(v) = r |v|
    return WulffBody.from_radial(lambda phi: r, 64)


def straight(n, d=1):
    step = (1,) + (0,) * (d - 1)
    return LatticePath.from_steps([step] * n)


def test_skeleton_1d_straight():
    sk = build_skeleton(straight(10), 3.0, body_1d())
    assert [p[0] for p in sk.points] == [0, 4, 8, 10]
    assert sk.indices == (0, 4, 8, 10)


def test_skeleton_short_path_is_endpoints():
    sk = build_skeleton(straight(2), 3.0, body_1d())
    assert sk.points == ((0,), (2,))


def test_skeleton_small_K_is_every_vertex():
    p = LatticePath.from_steps([(1, 0), (0, 1), (1, 0), (0, -1)])
    assert build_skeleton(p, 1e-6, euclid_body()).points == p.vertices


def test_skeleton_rejects_nonpositive_K():
    with pytest.raises(ContractViolation):
        build_skeleton(straight(3), 0.0, body_1d())


def test_surcharge_1d_back_hop():
    p = LatticePath(((0,), (1,), (2,), (1,), (0,)))
    sk = build_skeleton(p, 1.5, body_1d())
    assert sk.hops() == [(2,), (-2,)]
    rep = surcharge(sk, dual(1.0), body_1d())
    assert rep.hops == [0.0, 4.0]
    assert rep.total == 4.0


def test_surcharge_contact_direction_is_zero():
    sk = build_skeleton(straight(9, 2), 2.0, euclid_body())
    rep = surcharge(sk, dual(1.0, 0.0), euclid_body())
    assert max(rep.hops) < 1e-12


def test_surcharge_outside_body():
    sk = build_skeleton(straight(4), 1.0, body_1d())
    with pytest.raises(DomainError):
        surcharge(sk, dual(1.01), body_1d())
    assert on_boundary(euclid_body(2.0), dual(0.0, 2.0)) == pytest.approx(0.0, abs=1e-12)


def test_break_points_example_none():
    p = LatticePath(((0, 0), (0, 1), (1, 1), (1, 0)))
    assert regeneration_points(p, (1.0, 0.0)) == [2]
    assert break_points(p, (1.0, 0.0), 0.5, 0.1, euclid_body()) == []


def test_break_points_straight_and_empty():
    assert break_points(straight(3, 2), (1.0, 0.0), 0.5, 0.1, euclid_body()) == [1, 2]
    assert break_points(straight(1, 2), (1.0, 0.0), 0.5, 0.1, euclid_body()) == []


def test_histogram_1d_single_walk():
    h = surcharge_histogram(saw_model(1.0, 1), 10, 3.0, dual(1.0), body_1d(), (6,))
    assert h.paths == 1
    assert h.weights == {0: math.exp(-6.0)}
    assert h.backtracking_fraction() == 0.0


def test_histogram_unreachable_target_is_empty():
    h = surcharge_histogram(saw_model(1.0, 2), 4, 3.0, dual(1.0, 0.0), euclid_body(), (6, 0))
    assert h.weights == {} and h.paths == 0


def test_histogram_cap():
    with pytest.raises(ResourceError):
        surcharge_histogram(saw_model(1.0, 2), 30, 3.0, dual(1.0, 0.0), euclid_body(), (6, 0))


def test_histogram_counts_all_walks_to_target():
    from oracles import saw_vertex_lists
    n_walks = sum(1 for w in saw_vertex_lists(2, 6) if w[-1] == (2, 0))
    h = surcharge_histogram(saw_model(1.0, 2), 6, 1.0, dual(1.0, 0.0), euclid_body(), (2, 0))
    assert h.paths == n_walks


def test_xinorm_memoizes_integer_vectors():
    xi = XiNorm(euclid_body(2.0))
    assert xi((3, 4)) == xi((3, 4)) == pytest.approx(10.0, rel=1e-6)
    assert (3, 4) in xi._cache


walks = st.lists(st.sampled_from([(1, 0), (0, 1), (0, -1), (-1, 0)]), min_size=1, max_size=12)


@settings(max_examples=40, deadline=None)
@given(walks, st.floats(0.5, 4.0))
def test_break_points_are_regeneration_points(steps, K):
    p = LatticePath.from_steps(steps)
    t = (1.0, 0.0)
    assert set(break_points(p, t, K, 0.1, euclid_body())) <= set(regeneration_points(p, t))


@settings(max_examples=40, deadline=None)
@given(walks, st.floats(0.5, 4.0), st.floats(0, 2 * math.pi))
def test_surcharge_nonnegative(steps, K, phi):
    body = WulffBody.from_radial(lambda a: 1.0 + 0.2 * math.cos(2 * a), 64)
    r = float(body._curve()(phi))
    t = dual(r * math.cos(phi), r * math.sin(phi))
    rep = surcharge(build_skeleton(LatticePath.from_steps(steps), K, body), t, body)
    assert all(s >= 0.0 for s in rep.hops)
