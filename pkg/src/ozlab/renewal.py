"""Regeneration points, irreducible factorization and the renewal identity.

For a dual direction ``t`` a vertex ``z_l`` (``0 < l < n``) is a regeneration
point when the past lies strictly below it and the future weakly above::

    max_{j<l} (t, z_j) < (t, z_l) <= min_{j>l} (t, z_j)

Cutting at every regeneration point gives a unique factorization into a left
piece, bulk pieces and a right piece.  The bulk pieces sum to the direct
correlation series and the two-point function satisfies

    g = nocut + left * sum_k bulk^{*k} * right

exactly, length by length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ozlab.errors import ContractViolation, DataError
from ozlab.lattice import (
    DualVector,
    LatticePath,
    SpaceLengthSeries,
    add_series,
    as_point,
    convolve,
    geometric_sum,
    inner,
)
from ozlab.saw import (
    BULK,
    LEFT,
    NOCUT,
    PROJECTION_EPS,
    RIGHT,
    DecayEstimate,
    TwoPointTable,
    _require_saw,
    check_cap,
    classified_counts,
    counts_to_series,
    decay_rate_estimate,
    ratio_decay,
    ray_sums,
)
from ozlab.weights import WeightedPathModel


def _as_dual(t) -> DualVector:
    return t if isinstance(t, DualVector) else DualVector(tuple(t))


def _eps(t: DualVector) -> float:
    return PROJECTION_EPS * max(1.0, sum(abs(c) for c in t.components))


def regeneration_points(path: LatticePath, t) -> list[int]:
    t = _as_dual(t)
    if t.is_zero():
        raise ContractViolation("regeneration points need a nonzero dual vector")
    p = [inner(t, z) for z in path.vertices]
    n = len(p) - 1
    eps = _eps(t)
    out = []
    suffix_min = math.inf
    prefix_max = [p[0]]
    for v in p[1:]:
        prefix_max.append(max(prefix_max[-1], v))
    for l in range(n - 1, 0, -1):
        suffix_min = min(suffix_min, p[l + 1])
        if prefix_max[l - 1] < p[l] - eps and p[l] <= suffix_min + eps:
            out.append(l)
    return out[::-1]


@dataclass(frozen=True)
class Factorization:
    left_piece: LatticePath
    bulk_pieces: tuple[LatticePath, ...]
    right_piece: LatticePath | None
    direction: DualVector
    cuts: tuple[int, ...] = ()

    def pieces(self) -> list[LatticePath]:
        out = [self.left_piece, *self.bulk_pieces]
        if self.right_piece is not None:
            out.append(self.right_piece)
        return out

    def reassemble(self) -> LatticePath:
        path = self.left_piece
        for piece in self.pieces()[1:]:
            if piece.start != path.end:
                raise ContractViolation("pieces do not join")
            path = LatticePath(path.vertices + piece.vertices[1:], path.step_support)
        return path


def factorize(path: LatticePath, t) -> Factorization:
    t = _as_dual(t)
    cuts = regeneration_points(path, t)
    if not cuts:
        return Factorization(path, (), None, t, ())
    left = path.subpath(0, cuts[0])
    bulk = tuple(path.subpath(a, b) for a, b in zip(cuts, cuts[1:]))
    right = path.subpath(cuts[-1], len(path))
    return Factorization(left, bulk, right, t, tuple(cuts))


def piece_class(piece: LatticePath, t) -> set[str]:
    """Which of the piece classes a (rooted) walk belongs to, by the same
    predicates the enumerator uses."""
    t = _as_dual(t)
    if regeneration_points(piece, t):
        return set()
    p = [inner(t, z) for z in piece.vertices]
    eps = _eps(t)
    out = {"nocut"}
    if len(p) > 1:
        ends_high = max(p[:-1]) < p[-1] - eps
        starts_low = min(p) >= p[0] - eps
        if ends_high:
            out.add("left")
        if starts_low:
            out.add("right")
        if ends_high and starts_low:
            out.add("bulk")
    return out


@dataclass(frozen=True)
class DirectCorrelation:
    """Weighted sums over the piece classes, with lengths tracked."""

    model: WeightedPathModel
    direction: DualVector
    horizon: int
    bulk: SpaceLengthSeries
    left: SpaceLengthSeries
    right: SpaceLengthSeries
    nocut: SpaceLengthSeries

    @property
    def dim(self) -> int:
        return self.model.dim


def direct_correlation(model: WeightedPathModel, t, N: int, cap: int | None = None) -> DirectCorrelation:
    _require_saw(model)
    t = _as_dual(t)
    if t.is_zero():
        raise ContractViolation("direct correlation needs a nonzero dual vector")
    if t.dim != model.dim:
        raise ContractViolation(f"dimension mismatch: {t.dim} vs {model.dim}")
    check_cap(model.dim, N, cap)
    classes = classified_counts(model.dim, N, t)
    beta = model.beta
    series = [counts_to_series(classes[c], beta, N) for c in (BULK, LEFT, RIGHT, NOCUT)]
    return DirectCorrelation(model, t, N, *series)


def renewal_prediction(dc: DirectCorrelation) -> SpaceLengthSeries:
    """``nocut + left * sum_k bulk^{*k} * right``."""
    chain = convolve(convolve(dc.left, geometric_sum(dc.bulk)), dc.right)
    return add_series(dc.nocut, chain)


def _check_pair(table: TwoPointTable, dc: DirectCorrelation) -> None:
    if table.horizon != dc.horizon:
        raise ContractViolation(f"horizon mismatch: table {table.horizon} vs direct {dc.horizon}")
    if table.model.name != dc.model.name or table.model.params != dc.model.params \
            or table.dim != dc.dim:
        raise ContractViolation("table and direct correlation come from different models")


def renewal_residual(table: TwoPointTable, dc: DirectCorrelation) -> float:
    """Largest ``|g^(n)(x) - R^(n)(x)|`` over forward displacements ``(t, x) > 0``."""
    _check_pair(table, dc)
    pred = renewal_prediction(dc)
    g = table.series
    worst = 0.0
    for key in set(g) | set(pred):
        x, _n = key
        if inner(dc.direction, x) <= 0:
            continue
        worst = max(worst, abs(g[key] - pred[key]))
    return worst


@dataclass(frozen=True)
class MassGap:
    xi_full: DecayEstimate
    xi_direct: DecayEstimate | None
    gap: float
    gap_lower: float
    gap_upper: float

    def to_json(self) -> dict:
        def est(e):
            if e is None:
                return {"value": math.inf, "lower": math.inf, "upper": math.inf}
            return {"value": e.value, "lower": e.lower, "upper": e.upper,
                    "ks": list(e.ks), "ratios": list(e.ratios)}
        return {"xi_full": est(self.xi_full), "xi_direct": est(self.xi_direct),
                "gap": self.gap, "gap_lower": self.gap_lower, "gap_upper": self.gap_upper}


def _length_profiles(series: SpaceLengthSeries) -> dict:
    prof: dict = {}
    for (x, n), c in series.items():
        prof.setdefault(x, [0.0] * (series.horizon + 1))[n] += c
    return prof


def mass_gap_estimate(dc: DirectCorrelation, table: TwoPointTable, direction) -> MassGap:
    """Excess of the bulk series' decay rate over the full two-point decay rate.

    If the truncated bulk series vanishes on every multiple of ``direction``
    beyond the first that fits in the horizon, its decay rate at this horizon
    is infinite and the gap is reported as ``+inf``.
    """
    _check_pair(table, dc)
    direction = as_point(direction)
    if inner(dc.direction, direction) <= 0:
        raise ContractViolation("direction must have a positive projection on the dual vector")
    xi_full = decay_rate_estimate(table, direction)
    prof = _length_profiles(dc.bulk)
    zero = [0.0] * (dc.horizon + 1)
    step = sum(abs(c) for c in direction)
    reach = {k: math.fsum(prof.get(tuple(k * c for c in direction), zero))
             for k in range(1, dc.horizon // step + 1)}
    positive = [k for k, v in reach.items() if v > 0]
    if not positive:
        raise DataError("bulk series has no weight along the requested ray")
    if positive == [1]:
        return MassGap(xi_full, None, math.inf, math.inf, math.inf)
    vals = ray_sums(lambda x: prof.get(x, zero), direction, dc.horizon)
    xi_direct = ratio_decay(vals)
    return MassGap(xi_full, xi_direct, xi_direct.value - xi_full.value,
                   xi_direct.lower - xi_full.upper, xi_direct.upper - xi_full.lower)


def tilted_step_mass(dc: DirectCorrelation, t) -> float:
    """``sum bulk(y, m) exp((t, y))``."""
    t = _as_dual(t)
    if t.dim != dc.dim:
        raise ContractViolation(f"dimension mismatch: {t.dim} vs {dc.dim}")
    return dc.bulk.tilted_total(t)


def oz_extrapolate(dc: DirectCorrelation, targets, log: bool = False) -> dict:
    """Predict ``g(x)`` far beyond the horizon from ``left * sum_k bulk^{*k} * right``.

    Targets must lie on lattice rays with ``(t, x) > 0``.  The transverse
    coordinates are handled exactly in Fourier space: with all pieces
    advancing by at least one lattice unit along a coordinate axis, the chain
    is a one-dimensional renewal sequence with vector (Fourier mode)
    coefficients.  The computation runs in an exponentially tilted frame so
    that neither growth nor decay overflows.  With ``log=True`` the values are
    ``log g``.
    """
    targets = [as_point(x) for x in targets]
    if not targets:
        return {}
    for x in targets:
        if len(x) != dc.dim:
            raise ContractViolation(f"target {x} has wrong dimension")
        if inner(dc.direction, x) <= 0:
            raise ContractViolation(f"target {x} is not forward of the dual vector")
    return _RayRenewal(dc).evaluate(targets, log)


class _RayRenewal:
    """Renewal chain along the coordinate axis ``a`` carrying the dual vector.

    Only dual vectors along a coordinate axis are supported; the bulk pieces
    then advance by at least one unit along that axis.
    """

    def __init__(self, dc: DirectCorrelation):
        t = dc.direction.components
        nz = [i for i, c in enumerate(t) if c != 0.0]
        if len(nz) != 1:
            raise ContractViolation("oz_extrapolate supports dual vectors along a coordinate axis")
        self.axis = nz[0]
        self.sign = 1 if t[self.axis] > 0 else -1
        self.dc = dc
        self.d = dc.dim

    def _split(self, x):
        a = self.sign * x[self.axis]
        rest = tuple(c for i, c in enumerate(x) if i != self.axis)
        return a, rest

    def _kernel(self, series: SpaceLengthSeries):
        out: dict[int, dict[tuple, float]] = {}
        for x, c in series.spatial().items():
            a, rest = self._split(x)
            out.setdefault(a, {})
            out[a][rest] = out[a].get(rest, 0.0) + c
        return out

    def evaluate(self, targets, log: bool):
        dc = self.dc
        bulk = self._kernel(dc.bulk)
        left = self._kernel(dc.left)
        right = self._kernel(dc.right)
        if any(a <= 0 for a in bulk):
            raise ContractViolation("bulk pieces must advance along the axis")
        amax = max(self._split(x)[0] for x in targets)
        m = self.d - 1
        # transverse reach of any chain ending at amax bounds the Fourier grid (no aliasing)
        reach = 0
        for ker in (bulk, left, right):
            for a, row in ker.items():
                for rest in row:
                    reach = max(reach, max((abs(c) for c in rest), default=0) / max(a, 1))
        span_max = max((abs(c) for x in targets for c in self._split(x)[1]), default=0)
        width = int(2 * (reach * (amax + dc.horizon) + span_max)) + 3
        M = 1
        while M < width:
            M *= 2
        M = max(M, 1)
        grids = np.meshgrid(*[2 * np.pi * np.arange(M) / M] * m, indexing="ij") if m else []

        # tilt s along the axis so the bulk generating function at zero mode is ~1
        s = self._unit_tilt(bulk)

        def fourier(ker):
            out = {}
            for a, row in ker.items():
                val = np.zeros((M,) * m, dtype=complex) if m else np.zeros((), dtype=complex)
                for rest, c in row.items():
                    phase = sum(g * r for g, r in zip(grids, rest)) if m else 0.0
                    val = val + c * math.exp(s * a) * np.exp(1j * phase)
                out[a] = val
            return out

        B, Lf, Rf = fourier(bulk), fourier(left), fourier(right)
        shape = (M,) * m if m else ()
        # H(a) = delta_{a,0} + sum_b B(b) H(a - b)
        H = [np.ones(shape, dtype=complex)]
        for a in range(1, amax + 1):
            acc = np.zeros(shape, dtype=complex)
            for b, Bb in B.items():
                if b <= a:
                    acc += Bb * H[a - b]
            H.append(acc)
        # LH(a) = sum_l L(l) H(a - l); G(a) = sum_r LH(a - r) R(r)
        LH = []
        for a in range(amax + 1):
            acc = np.zeros(shape, dtype=complex)
            for l, Ll in Lf.items():
                if 0 <= l <= a:
                    acc += Ll * H[a - l]
            LH.append(acc)
        nocut = dc.nocut.spatial()
        out = {}
        for x in targets:
            a, rest = self._split(x)
            acc = np.zeros(shape, dtype=complex)
            for r, Rr in Rf.items():
                if 0 <= r <= a:
                    acc += LH[a - r] * Rr
            if m:
                phase = sum(g * c for g, c in zip(grids, rest))
                val = float(np.real(np.sum(acc * np.exp(-1j * phase)))) / M ** m
            else:
                val = float(np.real(acc))
            # walks without regeneration points only reach targets inside the horizon
            extra = nocut.get(x, 0.0)
            if log:
                lv = math.log(val) - s * a if val > 0 else -math.inf
                out[x] = math.log(math.exp(lv) + extra) if extra else lv
            else:
                out[x] = (val * math.exp(-s * a) if val > 0 else 0.0) + extra
        return out

    @staticmethod
    def _unit_tilt(bulk) -> float:
        def mass(s):
            return sum(c * math.exp(s * a) for a, row in bulk.items() for c in row.values())
        if not bulk:
            return 0.0
        amax = max(bulk)
        lo, hi = -700.0 / amax, 700.0 / amax
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mass(mid) > 1.0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)
