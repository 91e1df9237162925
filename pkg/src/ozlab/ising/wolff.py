"""Wolff cluster Monte Carlo for finite-range ferromagnets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numba
import numpy as np

from ozlab.errors import DomainError
from ozlab.ising.model import IsingModel, SpinLattice

DEFAULT_BURN_IN = 200


@numba.njit(cache=True, nogil=True)
def _grow(spins, nbr, prob, rng, stack):
    V = spins.size
    seed = rng.integers(0, V)
    s0 = spins[seed]
    spins[seed] = -s0
    stack[0] = seed
    top = 1
    size = 1
    while top > 0:
        top -= 1
        i = stack[top]
        for m in range(nbr.shape[1]):
            j = nbr[i, m]
            if j >= 0 and spins[j] == s0 and rng.random() < prob[m]:
                spins[j] = -s0
                stack[top] = j
                top += 1
                size += 1
    return size


@numba.njit(cache=True, nogil=True)
def _flip_clusters(spins, nbr, prob, rng, count):
    stack = np.empty(spins.size, dtype=np.int64)
    flipped = 0
    for _ in range(count):
        flipped += _grow(spins, nbr, prob, rng, stack)
    return flipped


@numba.njit(cache=True, nogil=True)
def _flip_sites(spins, nbr, prob, rng, target):
    """Flip clusters until ``target`` sites have flipped; returns the cluster count."""
    stack = np.empty(spins.size, dtype=np.int64)
    flipped = 0
    clusters = 0
    while flipped < target:
        flipped += _grow(spins, nbr, prob, rng, stack)
        clusters += 1
    return clusters


@numba.njit(cache=True, nogil=True)
def _cluster_pairs(spins, nbr, prob, rng, count, coords, extents, strides, dmap, dweight, table):
    """Flip ``count`` clusters; return the mean over clusters of
    ``#{(i, j) in C x C : j - i = x} / |C|`` for every tracked displacement.

    ``dmap`` maps a wrapped flat displacement to its column and
    ``table[i, col]`` is the site ``i + x_col``; ``dweight`` halves pair
    hits when ``x`` and ``-x`` are distinct displacements sharing a column.  Small clusters are scanned
    pairwise, large ones by probing ``i + x`` in a membership mask.
    """
    V = spins.size
    d = coords.shape[1]
    ncols = table.shape[1]
    stack = np.empty(V, dtype=np.int64)
    members = np.empty(V, dtype=np.int64)
    mark = np.zeros(V, dtype=np.uint8)
    acc = np.zeros(ncols)
    local = np.zeros(ncols)
    for _ in range(count):
        seed = rng.integers(0, V)
        s0 = spins[seed]
        spins[seed] = -s0
        stack[0] = seed
        members[0] = seed
        top = 1
        size = 1
        while top > 0:
            top -= 1
            i = stack[top]
            for m in range(nbr.shape[1]):
                j = nbr[i, m]
                if j >= 0 and spins[j] == s0 and rng.random() < prob[m]:
                    spins[j] = -s0
                    stack[top] = j
                    members[size] = j
                    top += 1
                    size += 1
        local[:] = 0.0
        if size <= ncols:
            for a in range(size):
                ia = members[a]
                for b in range(size):
                    ib = members[b]
                    flat = 0
                    for k in range(d):
                        dk = coords[ib, k] - coords[ia, k]
                        if dk < 0:
                            dk += extents[k]
                        flat += dk * strides[k]
                    col = dmap[flat]
                    if col >= 0:
                        local[col] += dweight[flat]
        else:
            for a in range(size):
                mark[members[a]] = 1
            for a in range(size):
                ia = members[a]
                for col in range(ncols):
                    local[col] += mark[table[ia, col]]
            for a in range(size):
                mark[members[a]] = 0
        acc += local / size
    return acc / count


@dataclass
class SampleStream:
    """Seeded configuration stream; iterating yields one spin array per sweep.

    The yielded array is reused between sweeps, copy it to keep it.  A sweep
    is a fixed number of cluster flips, ``volume / <cluster size>`` with the
    mean size measured during burn-in.  (Stopping each sweep once ``volume``
    sites have flipped would make the observation time depend on the last
    cluster and bias the measured correlations.)
    """

    model: IsingModel
    lattice: SpinLattice
    sweeps: int
    seed: int
    burn_in: int = DEFAULT_BURN_IN
    clusters_per_sweep: int = field(default=0, init=False)

    def __iter__(self) -> Iterator[np.ndarray]:
        nbr, prob, rng, spins, per = self._setup()
        view = spins.reshape(self.lattice.extents)
        for _ in range(self.sweeps):
            _flip_clusters(spins, nbr, prob, rng, per)
            yield view

    def _setup(self):
        nbr, J = self.lattice.neighbours(self.model)
        prob = -np.expm1(-2.0 * self.model.beta * J)
        rng = np.random.default_rng(self.seed)
        spins = self.lattice.spins.reshape(-1).copy()
        V = spins.size
        clusters = _flip_sites(spins, nbr, prob, rng, V * self.burn_in) if self.burn_in else 0
        per = max(1, round(clusters / self.burn_in)) if self.burn_in else V
        self.clusters_per_sweep = per
        return nbr, prob, rng, spins, per

    def cluster_estimates(self, displacements) -> Iterator[np.ndarray]:
        """Per-sweep cluster (improved) estimates of ``<sigma_0 sigma_x>``.

        Each cluster contributes its pair count at displacement ``x`` divided
        by its size; the sweep value is the mean over its clusters.  Needs a
        periodic lattice.  Consumes the same random stream as iteration, so
        configurations are identical for equal seeds.
        """
        if not self.lattice.periodic:
            raise DomainError("cluster estimates need periodic boundaries")
        ext = np.asarray(self.lattice.extents, dtype=np.int64)
        strides = np.array([int(np.prod(ext[k + 1:])) for k in range(len(ext))], dtype=np.int64)
        coords = np.indices(self.lattice.extents).reshape(len(ext), -1).T.copy()
        dmap = np.full(self.lattice.volume, -1, dtype=np.int64)

        def wrap(x):
            return int(sum((int(c) % int(e)) * int(s) for c, e, s in zip(x, ext, strides)))

        # ordered pair counts at x and -x coincide, so they share a column
        dweight = np.zeros(self.lattice.volume)
        keys, shifts = [], []
        for x in displacements:
            flat = wrap(x)
            if dmap[flat] < 0:
                neg = wrap([-c for c in x])
                dmap[flat] = dmap[neg] = len(shifts)
                dweight[flat] = dweight[neg] = 1.0 if neg == flat else 0.5
                shifts.append([int(c) for c in x])
            keys.append(int(dmap[flat]))
        keys = np.asarray(keys, dtype=np.int64)
        table = np.empty((self.lattice.volume, len(shifts)), dtype=np.int64)
        for col, x in enumerate(shifts):
            shifted = (coords + np.asarray(x)) % ext
            table[:, col] = shifted @ strides
        nbr, prob, rng, spins, per = self._setup()
        for _ in range(self.sweeps):
            vals = _cluster_pairs(spins, nbr, prob, rng, per, coords, ext, strides, dmap,
                                  dweight, table)
            yield vals[keys]


def wolff_sample(model: IsingModel, lattice: SpinLattice, sweeps: int, seed: int,
                 burn_in: int = DEFAULT_BURN_IN, xi_target: float | None = None) -> SampleStream:
    """Stream of ``sweeps`` configurations after ``burn_in`` sweeps.

    Bonds along ``v`` between equal spins are activated with probability
    ``1 - exp(-2 beta J_v)``.  ``xi_target`` (a correlation length) enables
    the extents >= 8 xi check.
    """
    lattice.check(model)
    if sweeps < 0 or burn_in < 0:
        raise DomainError("sweeps and burn_in must be nonnegative")
    if model.beta > model.safety_bound():
        raise DomainError(f"beta={model.beta} exceeds the safety bound {model.safety_bound():.6g}")
    if xi_target is not None and min(lattice.extents) < 8 * xi_target:
        raise DomainError(f"extents {lattice.extents} are below 8 x correlation length {xi_target}")
    return SampleStream(model, lattice, int(sweeps), int(seed), int(burn_in))


def spawn_seeds(seed: int, chains: int) -> list[int]:
    """Independent per-chain seeds derived from one master seed."""
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in ss.spawn(chains)]
