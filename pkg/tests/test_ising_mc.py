import math

import numpy as np
import pytest

from ozlab.errors import DataError, DomainError
from ozlab.ising import IsingModel, SpinLattice, measure_correlation, spawn_seeds, wolff_sample
from ozlab.ising.measure import binning_error, correlations_from_csv, correlations_to_csv
from oracles import ising_ring_corr, ising_torus_brute


def streams(model, extents, sweeps, seed, chains=2, periodic=True, burn_in=100):
    return [wolff_sample(model, SpinLattice(extents, periodic), sweeps, s, burn_in=burn_in)
            for s in spawn_seeds(seed, chains)]


def within(est, exact, nsig=4.0):
    return abs(est.mean - exact) <= nsig * est.stderr + 1e-12


@pytest.mark.parametrize("estimator", ["plain", "cluster"])
def test_ring_matches_exact(estimator):
    beta, L = 0.6, 24
    m = IsingModel.nearest_neighbour(1, beta)
    est = measure_correlation(streams(m, (L,), 3000, 11), [(x,) for x in range(7)],
                              estimator=estimator)
    for e in est:
        assert within(e, ising_ring_corr(beta, L, e.x[0])), e


@pytest.mark.parametrize("estimator", ["plain", "cluster"])
def test_small_torus_matches_brute(estimator):
    beta = 0.3
    m = IsingModel.nearest_neighbour(2, beta)
    est = measure_correlation(streams(m, (4, 4), 4000, 5), [(1, 0), (2, 0), (1, 1)],
                              symmetrize=True, estimator=estimator)
    exact = {(1, 0): ising_torus_brute(beta, 4, 4, 1), (2, 0): ising_torus_brute(beta, 4, 4, 2)}
    for e in est:
        if e.x in exact:
            assert within(e, exact[e.x]), e


def test_open_chain_matches_tanh_power():
    beta, L = 0.5, 16
    m = IsingModel.nearest_neighbour(1, beta)
    est = measure_correlation(streams(m, (L,), 3000, 3, periodic=False), [(2,), (4,)])
    for e in est:
        assert within(e, math.tanh(beta) ** e.x[0]), e


def test_seeded_streams_are_reproducible():
    m = IsingModel.nearest_neighbour(2, 0.3)
    a = [s.copy() for s in wolff_sample(m, SpinLattice((8, 8)), 20, 42)]
    b = [s.copy() for s in wolff_sample(m, SpinLattice((8, 8)), 20, 42)]
    c = [s.copy() for s in wolff_sample(m, SpinLattice((8, 8)), 20, 43)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))


def test_workers_do_not_change_results():
    m = IsingModel.nearest_neighbour(2, 0.3)
    xs = [(1, 0), (3, 0)]
    one = measure_correlation(streams(m, (8, 8), 200, 9, chains=3), xs, workers=1)
    three = measure_correlation(streams(m, (8, 8), 200, 9, chains=3), xs, workers=3)
    assert one == three


def test_spawned_seeds_distinct():
    seeds = spawn_seeds(1, 8)
    assert len(set(seeds)) == 8 and spawn_seeds(1, 8) == seeds


def test_sampler_guards():
    m2 = IsingModel.nearest_neighbour(2, 0.5)
    with pytest.raises(DomainError):
        wolff_sample(m2, SpinLattice((16, 16)), 10, 0)
    m = IsingModel.nearest_neighbour(2, 0.3)
    with pytest.raises(DomainError):
        wolff_sample(m, SpinLattice((16, 16)), 10, 0, xi_target=3.0)
    with pytest.raises(DataError):
        measure_correlation(streams(m, (8, 8), 20, 0), [(1, 0)])


def test_cluster_estimates_need_periodic_lattice():
    m = IsingModel.nearest_neighbour(1, 0.5)
    st = wolff_sample(m, SpinLattice((16,), periodic=False), 5, 0)
    with pytest.raises(DomainError):
        next(st.cluster_estimates([(1,)]))


def test_binning_error_ar1():
    rho, n = 0.8, 2 ** 16
    rng = np.random.default_rng(0)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    for i in range(1, n):
        x[i] = rho * x[i - 1] + math.sqrt(1 - rho * rho) * rng.standard_normal()
    mean, err, tau = binning_error([x[:, None]])
    tau_exact = 0.5 * (1 + rho) / (1 - rho)
    assert tau[0] == pytest.approx(tau_exact, rel=0.2)
    assert err[0] == pytest.approx(math.sqrt(2 * tau_exact / n), rel=0.1)


def test_csv_round_trip():
    m = IsingModel.nearest_neighbour(1, 0.6)
    est = measure_correlation(streams(m, (16,), 150, 2), [(0,), (1,), (2,)])
    assert correlations_from_csv(correlations_to_csv(est)) == est
