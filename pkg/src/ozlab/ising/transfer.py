"""Transfer matrices for the square-lattice NN model on periodic strips, and
the one-dimensional closed form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import LinearOperator, eigsh

from ozlab.errors import DomainError, ResourceError, UnsupportedModelError
from ozlab.ising.model import IsingModel

MAX_WIDTH = 14
DENSE_WIDTH = 8


def exact_1d(model: IsingModel, x) -> float:
    """``<sigma_0 sigma_x> = tanh(beta J)^|x|`` for the infinite NN chain."""
    if model.dim != 1 or not model.is_nearest_neighbour():
        raise UnsupportedModelError("closed form exists for the 1D nearest-neighbour chain only")
    k = abs(int(x[0] if isinstance(x, (tuple, list)) else x))
    return math.tanh(model.beta * model.J) ** k


def _check(model: IsingModel, W: int, direction=(1, 0)) -> None:
    if model.dim != 2 or not model.is_nearest_neighbour():
        raise UnsupportedModelError("strip transfer matrices support the 2D nearest-neighbour model only")
    if W > MAX_WIDTH:
        raise ResourceError(f"width {W} exceeds the transfer-matrix cap {MAX_WIDTH}")
    if W < 2:
        raise DomainError(f"width must be >= 2, got {W}")
    if tuple(abs(int(c)) for c in direction) not in ((1, 0), (0, 1)):
        raise DomainError(f"strip correlation lengths are on-axis only, got {direction}")


class _Strip:
    """``T = D^1/2 V D^1/2`` on ``2^W`` column states (spin ``+1`` <-> bit 0)."""

    def __init__(self, model: IsingModel, W: int):
        self.W = W
        K = model.beta * model.J
        bits = (np.arange(2 ** W)[:, None] >> np.arange(W - 1, -1, -1)[None, :]) & 1
        self.s = 1 - 2 * bits
        self.ring = (self.s * np.roll(self.s, -1, axis=1)).sum(axis=1)
        self.dh = np.exp(0.5 * K * self.ring)
        self.A = np.array([[math.exp(K), math.exp(-K)], [math.exp(-K), math.exp(K)]])
        self.n = 2 ** W

    def apply_v(self, vec: np.ndarray) -> np.ndarray:
        x = vec.reshape((2,) * self.W)
        for ax in range(self.W):
            x = np.moveaxis(np.tensordot(self.A, x, axes=([1], [ax])), 0, ax)
        return x.reshape(-1)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.dh * self.apply_v(self.dh * vec)

    def dense(self) -> np.ndarray:
        V = np.ones((1, 1))
        for _ in range(self.W):
            V = np.kron(V, self.A)
        return self.dh[:, None] * V * self.dh[None, :]

    def top(self, k: int = 2):
        if self.W <= DENSE_WIDTH:
            w, U = eigh(self.dense())
            order = np.argsort(w)[::-1][:k]
            return w[order], U[:, order]
        op = LinearOperator((self.n, self.n), matvec=self.apply, dtype=np.float64)
        v0 = np.random.default_rng(0).random(self.n)
        w, U = eigsh(op, k=k, which="LA", v0=v0, tol=1e-14)
        order = np.argsort(w)[::-1]
        return w[order], U[:, order]


@dataclass(frozen=True)
class StripResult:
    W: int
    xi_strip: float
    lambda0: float
    lambda1: float

    def to_json(self) -> dict:
        return {"W": self.W, "xi_strip": self.xi_strip, "lambda0": self.lambda0, "lambda1": self.lambda1}


def strip_transfer_matrix(model: IsingModel, W: int, direction=(1, 0)) -> StripResult:
    """On-axis inverse correlation length ``log(lambda0 / lambda1)`` of a periodic strip."""
    _check(model, W, direction)
    w, _ = _Strip(model, W).top(2)
    return StripResult(W, float(math.log(w[0] / w[1])), float(w[0]), float(w[1]))


def strip_sequence(model: IsingModel, widths, direction=(1, 0)) -> list[StripResult]:
    return [strip_transfer_matrix(model, W, direction) for W in widths]


def aitken(values) -> float:
    """Aitken delta-squared limit of the last three terms of a sequence."""
    if len(values) < 3:
        raise DomainError("Aitken extrapolation needs at least three terms")
    a, b, c = (float(v) for v in values[-3:])
    den = (c - b) - (b - a)
    if den == 0.0:
        return c
    return c - (c - b) ** 2 / den


def strip_correlation(model: IsingModel, W: int, xs) -> dict[int, float]:
    """``<sigma_(0,0) sigma_(x,0)>`` on the infinitely long strip of width ``W``."""
    _check(model, W)
    st = _Strip(model, W)
    w, U = st.top(1)
    psi = U[:, 0]
    s0 = st.s[:, 0].astype(np.float64)
    xs = sorted({abs(int(x)) for x in xs})
    out = {}
    u = s0 * psi
    k = 0
    for x in xs:
        while k < x:
            u = st.apply(u) / w[0]
            k += 1
        out[x] = float(psi @ (s0 * u))
    return out


def strip_energy(model: IsingModel, W: int) -> float:
    """Nearest-neighbour correlation averaged over both bond orientations."""
    _check(model, W)
    st = _Strip(model, W)
    w, U = st.top(1)
    psi = U[:, 0]
    s0 = st.s[:, 0].astype(np.float64)
    along = float(psi @ (s0 * st.apply(s0 * psi))) / w[0]
    across = float(psi @ (st.s[:, 0] * st.s[:, 1] * psi))
    return 0.5 * (along + across)


def torus_correlation(model: IsingModel, W: int, L: int, x: int) -> float:
    """``<sigma_(0,0) sigma_(x,0)>`` on a ``W x L`` torus by exact traces."""
    _check(model, W)
    if W > DENSE_WIDTH:
        raise ResourceError(f"torus traces are dense; width {W} exceeds {DENSE_WIDTH}")
    st = _Strip(model, W)
    w, U = eigh(st.dense())
    lam = w / w.max()
    S = U.T @ (st.s[:, 0][:, None] * U)
    x = x % L
    num = float(np.sum(S ** 2 * np.outer(lam ** x, lam ** (L - x))))
    return num / float(np.sum(lam ** L))
