import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ozlab.errors import DataError, FitError
from ozlab.ising import CorrelationEstimate, fit_points, oz_fit


def synthetic(xi=0.4, p=0.5, psi=0.7, rel=0.01, rs=range(8, 34), seed=None, direction=(1, 0)):
    rng = np.random.default_rng(seed)
    out = []
    for r in rs:
        g = psi * r ** -p * math.exp(-xi * r)
        noise = 1 + rel * rng.standard_normal() if seed is not None else 1.0
        out.append(CorrelationEstimate(tuple(r * c for c in direction), g * noise, g * rel, 1000, 1.0))
    return out


def test_exact_data_recovers_parameters():
    f = oz_fit(synthetic(), (1, 0), 2)
    assert f.free.xi == pytest.approx(0.4, rel=1e-10)
    assert f.free.p == pytest.approx(0.5, abs=1e-9)
    assert f.free.psi == pytest.approx(0.7, rel=1e-9)
    assert f.constrained.xi == pytest.approx(0.4, rel=1e-10)
    assert f.constrained.chi2 < 1e-15
    assert f.window_ok


def test_noisy_fit_chi2_and_coverage():
    hits = 0
    for seed in range(40):
        f = oz_fit(synthetic(seed=seed), (1, 0), 2)
        hits += abs(f.free.xi - 0.4) <= 2 * f.free.sigma("xi")
    # roughly 95% of 2-sigma intervals cover the truth
    assert hits >= 33


def test_window_and_direction_selection():
    data = synthetic() + synthetic(direction=(0, 1))
    f = oz_fit(data, (1, 0), 2, window=(6, 20))
    assert f.n_points == 13 and f.x_min == 8 and f.x_max == 20
    d = oz_fit(synthetic(xi=0.3, direction=(1, 1), rs=range(2, 12)), (1, 1), 2)
    assert d.free.xi == pytest.approx(0.3 / math.sqrt(2), rel=1e-9)


def test_window_flag_not_error():
    f = oz_fit(synthetic(xi=0.1, rs=range(1, 10)), (1, 0), 2)
    assert not f.window_ok


def test_fit_rejections():
    with pytest.raises(DataError):
        oz_fit(synthetic(rs=range(1, 5)), (1, 0), 2)
    with pytest.raises(DataError):
        oz_fit(synthetic(rel=0.5), (1, 0), 2)
    bad = synthetic()
    bad[3] = CorrelationEstimate(bad[3].x, -1e-3, 1e-4, 10, 1.0)
    with pytest.raises(DataError):
        oz_fit(bad, (1, 0), 2)
    with pytest.raises(FitError):
        fit_points([5.0] * 8, [1.0] * 8, [0.1] * 8, 2)


def test_json_has_both_fits():
    js = oz_fit(synthetic(), (1, 0), 2).to_json()
    assert js["constrained"]["p"] == 0.5 and "p_err" in js["free"] and "p_err" not in js["constrained"]


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.0, 1.5), st.floats(0.01, 10.0))
def test_fit_is_exact_on_model_family(xi, p, psi):
    r = np.arange(3, 20, dtype=float)
    g = psi * r ** -p * np.exp(-xi * r)
    f = fit_points(r, g, 0.01 * g, 2)
    assert f.xi == pytest.approx(xi, rel=1e-7, abs=1e-9)
    assert f.p == pytest.approx(p, abs=1e-7)
