"""K-skeletons of paths, surcharge costs and break points.

Distances are measured with the inverse correlation length ``xi``, i.e. the
support function of a :class:`~ozlab.wulff.WulffBody`.  The ball ``K U`` is
``{v : xi(v) <= K}``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ozlab.errors import ContractViolation, DomainError
from ozlab.lattice import Cone, DualVector, LatticePath, Point, as_point, inner, l1, sub, unit_steps
from ozlab.renewal import regeneration_points
from ozlab.saw import check_cap
from ozlab.weights import WeightedPathModel
from ozlab.wulff import WulffBody

HIGH_SURCHARGE_FRACTION = 0.5
BOUNDARY_RTOL = 1e-6
_TIE = 1e-9


class XiNorm:
    """``xi`` from a body's support function, memoized on integer vectors."""

    def __init__(self, body: WulffBody):
        self.body = body
        self._cache: dict[Point, float] = {}

    def __call__(self, v) -> float:
        if all(isinstance(c, (int, np.integer)) for c in v):
            v = tuple(int(c) for c in v)
            val = self._cache.get(v)
            if val is None:
                val = self._cache[v] = self.body.support_fn(v)
            return val
        return self.body.support_fn(tuple(float(c) for c in v))


def _norm(body) -> XiNorm:
    return body if isinstance(body, XiNorm) else XiNorm(body)


@dataclass(frozen=True)
class Skeleton:
    points: tuple[Point, ...]
    K: float
    indices: tuple[int, ...]

    def hops(self) -> list[Point]:
        return [sub(b, a) for a, b in zip(self.points, self.points[1:])]


def build_skeleton(path: LatticePath, K: float, body) -> Skeleton:
    """Greedy skeleton: ``x_{k+1}`` is the first later vertex with ``xi(z - x_k) > K``;
    the path end is appended last."""
    if not K > 0:
        raise ContractViolation(f"K must be positive, got {K}")
    xi = _norm(body)
    verts = path.vertices
    idx = [0]
    for j in range(1, len(verts)):
        if xi(sub(verts[j], verts[idx[-1]])) > K:
            idx.append(j)
    if idx[-1] != len(verts) - 1:
        idx.append(len(verts) - 1)
    return Skeleton(tuple(verts[i] for i in idx), float(K), tuple(idx))


def on_boundary(body: WulffBody, t: DualVector, rtol: float = BOUNDARY_RTOL) -> float:
    """Relative radial excess ``|t| / r(t/|t|) - 1`` of ``t`` over the body boundary."""
    if body.dim == 1:
        r = next(abs(s[0]) for s in body.duals if s[0] * t.components[0] > 0)
        return abs(t.components[0]) / r - 1.0
    if body.dim == 2:
        phi = math.atan2(t.components[1], t.components[0])
        return t.norm() / float(body._curve()(phi % (2 * math.pi))) - 1.0
    raise DomainError("boundary test is implemented for d <= 2")


@dataclass
class SurchargeReport:
    hops: list[float]
    total: float
    direction: tuple[float, ...]

    def to_json(self) -> dict:
        return {"hops": self.hops, "total": self.total, "t": list(self.direction)}


def surcharge(skeleton: Skeleton, t, body, rtol: float = BOUNDARY_RTOL) -> SurchargeReport:
    """``s_t(v) = xi(v) - (t, v)`` for every skeleton hop.

    ``t`` must not lie outside the body by more than ``rtol`` (relative), else
    surcharges could be negative.
    """
    t = t if isinstance(t, DualVector) else DualVector(tuple(t))
    xi = _norm(body)
    if on_boundary(xi.body, t) > rtol:
        raise DomainError(f"t={t.components} lies outside the body")
    hops = [max(0.0, xi(v) - inner(t, v)) if any(v) else 0.0 for v in skeleton.hops()]
    return SurchargeReport(hops, math.fsum(hops), t.components)


def _cone_edges(cone: Cone, xi: XiNorm) -> list[np.ndarray]:
    """Unit vectors spanning the closed cone's boundary (d = 1, 2)."""
    d = cone.axis.dim
    t = np.asarray(cone.axis.components, dtype=float)
    if d == 1:
        return [np.array([math.copysign(1.0, t[0])])]
    if d != 2:
        raise DomainError("cone geometry is implemented for d <= 2")

    def f(phi):
        u = (math.cos(phi), math.sin(phi))
        return float(t @ u) - (1.0 - cone.delta) * xi(u)

    grid = np.linspace(0.0, 2 * math.pi, 721)[:-1]
    vals = [f(p) for p in grid]
    i0 = int(np.argmax(vals))
    if vals[i0] <= 0.0:
        return []
    phi0 = grid[i0]
    edges = []
    for sign in (1.0, -1.0):
        k = 1
        while f(phi0 + sign * k * math.pi / 360) > 0.0:
            k += 1
        a, b = phi0 + sign * (k - 1) * math.pi / 360, phi0 + sign * k * math.pi / 360
        phi = brentq(f, min(a, b), max(a, b), xtol=1e-14)
        edges.append(np.array([math.cos(phi), math.sin(phi)]))
    return edges


def in_ball_plus_cone(w, K: float, cone: Cone, xi: XiNorm, edges=None) -> bool:
    """``w in K U + C_delta(t)`` (the cone taken with its apex)."""
    if not any(w):
        return True
    if xi(w) <= K * (1 + _TIE):
        return True
    if cone.contains(w, xi):
        return True
    if edges is None:
        edges = _cone_edges(cone, xi)
    wv = np.asarray(w, dtype=float)
    smax = 4.0 * (float(np.linalg.norm(wv)) + 1.0)
    for u in edges:
        res = minimize_scalar(lambda s: xi(tuple(wv - s * u)), bounds=(0.0, smax),
                              method="bounded", options={"xatol": 1e-10})
        if min(res.fun, xi(tuple(wv - res.x * u))) <= K * (1 + _TIE):
            return True
    return False


def break_points(path: LatticePath, t, K: float, delta: float, body) -> list[int]:
    """Regeneration points whose whole suffix lies in ``z_l + K U + C_delta(t)``."""
    if not K > 0:
        raise ContractViolation(f"K must be positive, got {K}")
    t = t if isinstance(t, DualVector) else DualVector(tuple(t))
    cone = Cone(t, delta)
    xi = _norm(body)
    edges = None
    out = []
    for l in regeneration_points(path, t):
        zl = path.vertices[l]
        if edges is None:
            edges = _cone_edges(cone, xi)
        if all(in_ball_plus_cone(sub(z, zl), K, cone, xi, edges) for z in path.vertices[l + 1:]):
            out.append(l)
    return out


def _walks_to(d: int, target: Point, N: int):
    """Self-avoiding walks from the origin ending at ``target`` with at most ``N`` steps."""
    steps = unit_steps(d)
    path = [(0,) * d]
    occupied = {path[0]}

    def rec():
        here = path[-1]
        if here == target:
            yield tuple(path)
        left = N - (len(path) - 1)
        for s in steps:
            nxt = tuple(a + b for a, b in zip(here, s))
            if nxt in occupied or l1(sub(target, nxt)) > left - 1:
                continue
            path.append(nxt)
            occupied.add(nxt)
            yield from rec()
            occupied.discard(nxt)
            path.pop()

    if l1(target) <= N:
        yield from rec()


@dataclass
class SurchargeHistogram:
    """Path weight by number of high-surcharge (backtracking) skeleton hops."""

    weights: dict[int, float]
    K: float
    threshold: float
    paths: int
    max_hops: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return math.fsum(self.weights.values())

    def backtracking_fraction(self) -> float:
        tot = self.total
        if tot == 0.0:
            return 0.0
        return math.fsum(w for k, w in self.weights.items() if k >= 1) / tot

    def to_json(self) -> dict:
        return {"K": self.K, "threshold": self.threshold, "paths": self.paths,
                "weights": {str(k): w for k, w in sorted(self.weights.items())},
                "backtracking_fraction": self.backtracking_fraction(),
                "max_hops": self.max_hops, **self.extra}


def surcharge_histogram(model: WeightedPathModel, N: int, K: float, t, body, target,
                        fraction: float = HIGH_SURCHARGE_FRACTION,
                        cap: int | None = None) -> SurchargeHistogram:
    """Aggregate weights of walks ``0 -> target`` (length <= N) by the number of
    skeleton hops with surcharge ``>= fraction * K``.

    ``extra["log_skeleton_entropy"]`` reports ``(d - 1) log K`` per hop, the
    log of the skeleton-count growth used in energy-entropy estimates.
    """
    check_cap(model.dim, N, cap)
    target = as_point(target)
    if len(target) != model.dim:
        raise ContractViolation("target dimension mismatch")
    t = t if isinstance(t, DualVector) else DualVector(tuple(t))
    xi = _norm(body)
    threshold = fraction * K
    weights: dict[int, float] = defaultdict(float)
    count, max_hops = 0, 0
    for verts in _walks_to(model.dim, target, N):
        path = LatticePath(verts)
        sk = build_skeleton(path, K, xi)
        rep = surcharge(sk, t, xi)
        high = sum(1 for s in rep.hops if s >= threshold)
        weights[high] += model.weight(path)
        count += 1
        max_hops = max(max_hops, len(rep.hops))
    return SurchargeHistogram(dict(weights), float(K), threshold, count, max_hops,
                              {"log_skeleton_entropy": (model.dim - 1) * math.log(K)})
