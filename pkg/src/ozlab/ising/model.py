"""Finite-range ferromagnetic Ising models and spin lattices."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ozlab.errors import DomainError
from ozlab.lattice import Point, as_point

# Default safety bound for the square-lattice nearest-neighbour model (beta_c ~ 0.4407).
NN2D_BETA_MAX = 0.42


@dataclass(frozen=True)
class IsingModel:
    """``H = -sum_{x, v} J_v sigma_x sigma_{x+v}`` with ``J_v = J_{-v} >= 0``.

    ``couplings`` lists both ``v`` and ``-v``.
    """

    dim: int
    couplings: dict[Point, float]
    beta: float
    beta_max: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dimension must be >= 1, got {self.dim}")
        if not self.beta >= 0 or not math.isfinite(self.beta):
            raise DomainError(f"beta must be a finite nonnegative number, got {self.beta}")
        clean = {}
        for v, J in self.couplings.items():
            v = as_point(v)
            if len(v) != self.dim:
                raise DomainError(f"coupling vector {v} has the wrong dimension")
            if not any(v):
                raise DomainError("J_0 must vanish")
            if J < 0:
                raise DomainError(f"coupling J{v} = {J} is not ferromagnetic")
            if J > 0:
                clean[v] = float(J)
        for v, J in clean.items():
            mv = tuple(-c for c in v)
            if clean.get(mv) != J:
                raise DomainError(f"couplings must satisfy J_v = J_-v; J{v}={J} but J{mv}={clean.get(mv, 0.0)}")
        if not clean:
            raise DomainError("at least one coupling must be positive")
        object.__setattr__(self, "couplings", dict(sorted(clean.items())))

    @classmethod
    def nearest_neighbour(cls, dim: int, beta: float, J: float = 1.0, **kw) -> "IsingModel":
        coup = {}
        for i in range(dim):
            for s in (1, -1):
                v = [0] * dim
                v[i] = s
                coup[tuple(v)] = J
        return cls(dim, coup, beta, **kw)

    @property
    def range(self) -> float:
        return max(math.sqrt(sum(c * c for c in v)) for v in self.couplings)

    def is_nearest_neighbour(self) -> bool:
        vals = set(self.couplings.values())
        return len(self.couplings) == 2 * self.dim and len(vals) == 1 and \
            all(sum(abs(c) for c in v) == 1 for v in self.couplings)

    @property
    def J(self) -> float:
        return next(iter(self.couplings.values()))

    def safety_bound(self) -> float:
        """Largest beta accepted by the samplers.

        Explicit ``beta_max`` wins; d=1 has no transition; the square-lattice
        NN model uses 0.42/J; otherwise the Dobrushin-type condition
        ``sum_v tanh(beta J_v) < 1`` is used.
        """
        if self.beta_max is not None:
            return self.beta_max
        if self.dim == 1:
            return math.inf
        if self.dim == 2 and self.is_nearest_neighbour():
            return NN2D_BETA_MAX / self.J
        lo, hi = 0.0, 1.0
        while sum(math.tanh(hi * J) for J in self.couplings.values()) < 1.0:
            hi *= 2.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if sum(math.tanh(mid * J) for J in self.couplings.values()) < 1.0:
                lo = mid
            else:
                hi = mid
        return lo

    def symmetries(self) -> list[np.ndarray]:
        """Signed permutation matrices that map the coupling set onto itself."""
        out = []
        for perm in itertools.permutations(range(self.dim)):
            for signs in itertools.product((1, -1), repeat=self.dim):
                M = np.zeros((self.dim, self.dim), dtype=np.int64)
                for i, (p, s) in enumerate(zip(perm, signs)):
                    M[i, p] = s
                ok = all(self.couplings.get(tuple(int(c) for c in M @ np.array(v)), 0.0) == J
                         for v, J in self.couplings.items())
                if ok:
                    out.append(M)
        return out


@dataclass
class SpinLattice:
    """Spins on a box with optional periodic wrap; all spins up by default."""

    extents: tuple[int, ...]
    periodic: bool = True
    spins: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.extents = tuple(int(e) for e in self.extents)
        if not self.extents or any(e <= 0 for e in self.extents):
            raise DomainError(f"extents must be positive, got {self.extents}")
        if self.spins is None:
            self.spins = np.ones(self.extents, dtype=np.int8)
        else:
            s = np.asarray(self.spins, dtype=np.int8)
            if s.shape != self.extents or not np.all(np.abs(s) == 1):
                raise DomainError("spins must be +-1 with the lattice shape")
            self.spins = s

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def volume(self) -> int:
        return int(np.prod(self.extents))

    def check(self, model: IsingModel) -> None:
        if model.dim != self.dim:
            raise DomainError(f"model dimension {model.dim} does not match lattice {self.dim}")
        R = max(max(abs(c) for c in v) for v in model.couplings)
        if any(e < 2 * R + 1 for e in self.extents):
            raise DomainError(f"extents {self.extents} must be >= 2R+1 = {2 * R + 1}")

    def neighbours(self, model: IsingModel) -> tuple[np.ndarray, np.ndarray]:
        """Flat neighbour table ``(V, M)`` (``-1`` off an open boundary) and the
        coupling per column."""
        self.check(model)
        idx = np.arange(self.volume).reshape(self.extents)
        coords = np.indices(self.extents).reshape(self.dim, -1)
        vs = list(model.couplings)
        nbr = np.empty((self.volume, len(vs)), dtype=np.int64)
        for m, v in enumerate(vs):
            shifted = coords + np.asarray(v)[:, None]
            if self.periodic:
                shifted %= np.asarray(self.extents)[:, None]
                nbr[:, m] = idx[tuple(shifted)]
            else:
                inside = np.all((shifted >= 0) & (shifted < np.asarray(self.extents)[:, None]), axis=0)
                col = np.full(self.volume, -1, dtype=np.int64)
                col[inside] = idx[tuple(shifted[:, inside])]
                nbr[:, m] = col
        J = np.array([model.couplings[v] for v in vs])
        return nbr, J
