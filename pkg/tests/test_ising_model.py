import math

import numpy as np
import pytest

from ozlab.errors import DomainError
from ozlab.ising import IsingModel, SpinLattice


def test_nearest_neighbour_couplings():
    m = IsingModel.nearest_neighbour(2, 0.3)
    assert set(m.couplings) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert m.is_nearest_neighbour() and m.J == 1.0 and m.range == 1.0


@pytest.mark.parametrize("coup,msg", [
    ({(1,): -1.0, (-1,): -1.0}, "ferromagnetic"),
    ({(1,): 1.0, (-1,): 0.5}, "J_v = J_-v"),
    ({(0,): 1.0}, "J_0"),
    ({(1,): 0.0, (-1,): 0.0}, "positive"),
])
def test_invalid_couplings(coup, msg):
    with pytest.raises(DomainError, match=msg):
        IsingModel(1, coup, 0.5)


def test_safety_bounds():
    assert IsingModel.nearest_neighbour(1, 5.0).safety_bound() == math.inf
    assert IsingModel.nearest_neighbour(2, 0.3).safety_bound() == pytest.approx(0.42)
    assert IsingModel.nearest_neighbour(2, 0.3, J=2.0).safety_bound() == pytest.approx(0.21)
    m3 = IsingModel.nearest_neighbour(3, 0.1)
    # six bonds: 6 tanh(beta) = 1
    assert m3.safety_bound() == pytest.approx(math.atanh(1 / 6), rel=1e-12)
    assert IsingModel.nearest_neighbour(2, 0.3, beta_max=0.1).safety_bound() == 0.1


def test_symmetries():
    assert len(IsingModel.nearest_neighbour(2, 0.3).symmetries()) == 8
    aniso = IsingModel(2, {(1, 0): 1.0, (-1, 0): 1.0, (0, 1): 0.5, (0, -1): 0.5}, 0.3)
    assert len(aniso.symmetries()) == 4


def test_lattice_neighbours_periodic_and_open():
    m = IsingModel.nearest_neighbour(2, 0.3)
    lat = SpinLattice((3, 4))
    nbr, J = lat.neighbours(m)
    assert nbr.shape == (12, 4) and np.all(J == 1.0)
    # every site appears 4 times as a neighbour on the torus
    assert np.all(np.bincount(nbr.ravel(), minlength=12) == 4)
    nbr_open, _ = SpinLattice((3, 4), periodic=False).neighbours(m)
    # open box has 2*3*4 - 3 - 4 = 17 bonds, each seen twice
    assert int(np.sum(nbr_open >= 0)) == 34


def test_lattice_checks():
    with pytest.raises(DomainError):
        SpinLattice((2, 4)).check(IsingModel.nearest_neighbour(2, 0.3))
    with pytest.raises(DomainError):
        SpinLattice((4, 4), spins=np.zeros((4, 4)))
    with pytest.raises(DomainError):
        SpinLattice((4,)).check(IsingModel.nearest_neighbour(2, 0.3))
