"""Exact length-truncated enumeration of weighted self-avoiding walks.

Walks are counted by an iterative depth-first search over a dense occupancy
grid.  SAW weights depend on the length only, so the enumerator produces
integer counts per (length, endpoint) and weights are applied afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np

from ozlab.errors import ContractViolation, DataError, ResourceError, UnsupportedModelError
from ozlab.lattice import DualVector, Point, SpaceLengthSeries, as_point, inner, l1
from ozlab.weights import WeightedPathModel

ENUMERATION_CAPS = {1: 400, 2: 20, 3: 14}
DEFAULT_CAP = 10

# Piece classes produced by the classifying enumerator, in array order.
BULK, LEFT, RIGHT, NOCUT = range(4)

# Relative slack for projection comparisons; the same rule is used by
# ozlab.renewal.regeneration_points so both sides classify ties identically.
PROJECTION_EPS = 1e-10


def enumeration_cap(d: int) -> int:
    return ENUMERATION_CAPS.get(d, DEFAULT_CAP)


def check_cap(d: int, N: int, cap: int | None = None) -> None:
    if N < 0:
        raise ContractViolation(f"horizon must be >= 0, got {N}")
    cap = enumeration_cap(d) if cap is None else cap
    if N > cap:
        raise ResourceError(f"max length {N} exceeds the enumeration cap {cap} for d={d}")


def _grid(d: int, N: int):
    L = 2 * N + 1
    strides = np.array([L ** i for i in range(d)], dtype=np.int64)
    offsets = np.empty(2 * d, dtype=np.int64)
    for i in range(d):
        offsets[2 * i] = strides[i]
        offsets[2 * i + 1] = -strides[i]
    center = int(N * strides.sum())
    return L, strides, offsets, center


def _site_coords(d: int, N: int) -> np.ndarray:
    L = 2 * N + 1
    idx = np.arange(L ** d)
    coords = np.empty((L ** d, d), dtype=np.int64)
    for i in range(d):
        coords[:, i] = (idx // L ** i) % L - N
    return coords


@numba.njit(cache=True)
def _dfs(N, size, offsets, center, proj, eps, classify):
    nsteps = offsets.shape[0]
    occ = np.zeros(size, dtype=np.uint8)
    counts = np.zeros((N + 1, size), dtype=np.int64)
    if classify:
        classes = np.zeros((4, N + 1, size), dtype=np.int64)
    else:
        classes = np.zeros((4, 1, 1), dtype=np.int64)
    path = np.empty(N + 1, dtype=np.int64)
    nxt = np.zeros(N + 1, dtype=np.int64)
    p = np.empty(N + 1)
    pm = np.empty(N + 1)

    path[0] = center
    occ[center] = 1
    counts[0, center] = 1
    if classify:
        p[0] = proj[center]
        pm[0] = p[0]
        classes[3, 0, center] = 1
    depth = 0
    while True:
        if depth < N and nxt[depth] < nsteps:
            k = nxt[depth]
            nxt[depth] += 1
            site = path[depth] + offsets[k]
            if occ[site]:
                continue
            depth += 1
            path[depth] = site
            occ[site] = 1
            nxt[depth] = 0
            counts[depth, site] += 1
            if classify:
                p[depth] = proj[site]
                pm[depth] = max(pm[depth - 1], p[depth])
                # scan interior vertices for a regeneration point, tracking suffix minima
                smin = p[depth]
                lowest = p[depth]
                free = True
                for l in range(depth - 1, 0, -1):
                    if pm[l - 1] < p[l] - eps and p[l] <= smin + eps:
                        free = False
                        break
                    if p[l] < smin:
                        smin = p[l]
                    if p[l] < lowest:
                        lowest = p[l]
                if free:
                    classes[3, depth, site] += 1
                    ends_high = pm[depth - 1] < p[depth] - eps
                    starts_low = lowest >= p[0] - eps
                    if ends_high:
                        classes[1, depth, site] += 1
                    if starts_low:
                        classes[2, depth, site] += 1
                    if ends_high and starts_low:
                        classes[0, depth, site] += 1
        else:
            if depth == 0:
                break
            occ[path[depth]] = 0
            depth -= 1
    return counts, classes


@lru_cache(maxsize=8)
def saw_counts(d: int, N: int) -> np.ndarray:
    """Integer walk counts, shape ``(N + 1,) + (2N + 1,) * d`` indexed by ``[n, x_1 + N, ...]``."""
    check_cap(d, N, cap=max(enumeration_cap(d), N))
    L, _strides, offsets, center = _grid(d, N)
    counts, _ = _dfs(N, L ** d, offsets, center, np.zeros(1), 0.0, False)
    # flat index is x_1 + L x_2 + ...; numpy C order puts x_1 last
    out = counts.reshape((N + 1,) + (L,) * d).transpose((0,) + tuple(range(d, 0, -1)))
    out.setflags(write=False)
    return out


def classified_counts(d: int, N: int, t: DualVector) -> np.ndarray:
    """Counts of regeneration-free walks split into piece classes.

    Shape ``(4, N + 1) + (2N + 1,) * d`` with class order BULK, LEFT, RIGHT, NOCUT.
    """
    L, _strides, offsets, center = _grid(d, N)
    coords = _site_coords(d, N)
    tv = np.asarray(t.components, dtype=float)
    proj = coords @ tv
    eps = PROJECTION_EPS * max(1.0, float(np.abs(tv).sum()))
    _, classes = _dfs(N, L ** d, offsets, center, proj, eps, True)
    out = classes.reshape((4, N + 1) + (L,) * d)
    return out.transpose((0, 1) + tuple(range(d + 1, 1, -1)))


def counts_to_series(counts: np.ndarray, beta: float, N: int) -> SpaceLengthSeries:
    d = counts.ndim - 1
    coeffs = {}
    for idx in zip(*np.nonzero(counts)):
        n = int(idx[0])
        x = tuple(int(i) - N for i in idx[1:])
        coeffs[(x, n)] = float(counts[idx]) * math.exp(-beta * n)
    return SpaceLengthSeries(d, N, coeffs)


def _require_saw(model: WeightedPathModel) -> None:
    if model.name != "saw":
        raise UnsupportedModelError(f"exact enumeration is implemented for SAW weights only, not {model.name!r}")


@dataclass
class TwoPointTable:
    """``g^(n)(x)`` for all ``n <= horizon``."""

    model: WeightedPathModel
    horizon: int
    counts: np.ndarray = field(repr=False)
    _series: SpaceLengthSeries | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def beta(self) -> float:
        return self.model.beta

    @property
    def series(self) -> SpaceLengthSeries:
        if self._series is None:
            self._series = counts_to_series(self.counts, self.beta, self.horizon)
        return self._series

    def walk_counts(self) -> list[int]:
        """Number of SAWs of each length (summed over endpoints)."""
        return [int(c) for c in self.counts.reshape(self.horizon + 1, -1).sum(axis=1)]

    def _index(self, x: Point):
        N = self.horizon
        if any(abs(c) > N for c in x):
            return None
        return tuple(c + N for c in x)

    def coefficient(self, x, n: int) -> float:
        idx = self._index(as_point(x))
        if idx is None or not 0 <= n <= self.horizon:
            return 0.0
        return float(self.counts[(n,) + idx]) * math.exp(-self.beta * n)

    def length_profile(self, x) -> list[float]:
        """``[g^(0)(x), ..., g^(N)(x)]``."""
        idx = self._index(as_point(x))
        if idx is None:
            return [0.0] * (self.horizon + 1)
        col = self.counts[(slice(None),) + idx]
        return [float(c) * math.exp(-self.beta * n) for n, c in enumerate(col)]

    def g(self, x) -> float:
        """``sum_n g^(n)(x)`` truncated at the horizon."""
        x = as_point(x)
        idx = self._index(x)
        if idx is None:
            return 0.0
        col = self.counts[(slice(None),) + idx]
        return math.fsum(float(c) * math.exp(-self.beta * n) for n, c in enumerate(col) if c)


def enumerate_two_point(model: WeightedPathModel, N: int, cap: int | None = None) -> TwoPointTable:
    _require_saw(model)
    check_cap(model.dim, N, cap)
    return TwoPointTable(model, N, saw_counts(model.dim, N))


def tilted_susceptibility(table: TwoPointTable, t) -> float:
    """``sum_{x, n <= N} exp((t, x)) g^(n)(x)``."""
    tc = t.components if isinstance(t, DualVector) else tuple(t)
    if len(tc) != table.dim:
        raise ContractViolation(f"dimension mismatch: {len(tc)} vs {table.dim}")
    return table.series.tilted_total(tc)


@dataclass(frozen=True)
class DecayEstimate:
    """Ratio-method estimate of an inverse correlation length along a ray."""

    value: float
    lower: float
    upper: float
    ks: tuple[int, ...]
    ratios: tuple[float, ...]

    @property
    def width(self) -> float:
        return self.upper - self.lower


def ratio_decay(values: dict[int, float], prefactor: float = 0.0) -> DecayEstimate:
    """Decay rate from ``G(k)`` along consecutive multiples ``k``.

    Uses ``r_k = -log(G(k+1)/G(k)) - prefactor * log((k+1)/k)`` on the last
    three ``k``, i.e. ratios with a known power-law prefactor ``k^-prefactor``
    divided out.  The remaining approach is taken to be ``O(1/(k(k+1)))``;
    the reported value is the Richardson combination of the two ratios and
    the bracket is the hull of the two ratios and that value.
    """
    ks = sorted(k for k, v in values.items() if v > 0)
    run = []
    for k in ks:
        if run and k != run[-1] + 1:
            break
        run.append(k)
    if len(run) < 3:
        raise DataError(f"need at least 3 consecutive reachable multiples, got {run}")
    run = run[-3:]
    ratios = tuple(
        math.log(values[k]) - math.log(values[k + 1]) - prefactor * math.log((k + 1) / k)
        for k in run[:-1]
    )
    w_prev, w_last = run[0] * run[1], run[1] * run[2]
    r_prev, r_last = ratios
    rich = (w_last * r_last - w_prev * r_prev) / (w_last - w_prev)
    lo, hi = min(rich, *ratios), max(rich, *ratios)
    return DecayEstimate(rich, lo, hi, tuple(run), ratios)


def ray_sums(lookup, direction: Point, horizon: int) -> dict[int, float]:
    """``G(k) = sum_{n <= k|dir| + E} lookup(k dir, n)`` along the ray.

    ``lookup(x)`` returns per-length coefficients ``[c_0, c_1, ...]``.  Only
    multiples with ``k |dir| <= horizon / 2`` are used, and every ``k`` gets
    the same budget ``E`` of excess steps.  A common budget matters: walks to
    ``x`` have lengths of the parity of ``|x|``, so a plain cut at the horizon
    keeps a different number of length shells for odd and even ``k``.
    """
    step = l1(direction)
    if step == 0:
        raise ContractViolation("direction must be nonzero")
    kmax = horizon // (2 * step)
    excess = horizon - kmax * step
    excess -= excess % 2
    out = {}
    for k in range(1, kmax + 1):
        coeffs = lookup(tuple(k * c for c in direction))
        out[k] = math.fsum(coeffs[: k * step + excess + 1])
    return out


def decay_rate_estimate(table: TwoPointTable, direction) -> DecayEstimate:
    """Inverse correlation length along ``direction`` (per multiple of it).

    Ratios are taken with the ``k^{-(d-1)/2}`` prefactor of the two-point
    function divided out.
    """
    direction = as_point(direction)
    if len(direction) != table.dim:
        raise ContractViolation(f"dimension mismatch: {len(direction)} vs {table.dim}")
    if l1(direction) == 0:
        raise ContractViolation("direction must be nonzero")
    vals = ray_sums(table.length_profile, direction, table.horizon)
    return ratio_decay(vals, prefactor=(table.dim - 1) / 2)
