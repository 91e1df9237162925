"""The convex body of convergent tilts, its support function and curvature.

For factorized (SAW) weights the leading eigenvalue of the tilted transfer
operator is the tilted generating function of bulk pieces,

    rho(z) = sum_y bulk(y) exp((z, y)),

and the boundary of the body is the level set ``rho = 1``.  Each boundary
sample ``t*(n) = s* n`` is solved on the ray through ``n`` using the bulk
series decomposed along ``n`` itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from ozlab.errors import ContractViolation, DataError, DivergenceError, DomainError, OzlabError
from ozlab.lattice import DualVector, as_point, inner
from ozlab.renewal import DirectCorrelation, direct_correlation
from ozlab.saw import TwoPointTable, decay_rate_estimate

BOUNDARY_TOL = 1e-10
S_MAX = 50.0


def perron_root(dc: DirectCorrelation, z) -> float:
    z = z if isinstance(z, DualVector) else DualVector(tuple(z))
    if z.dim != dc.dim:
        raise ContractViolation(f"dimension mismatch: {z.dim} vs {dc.dim}")
    terms = []
    for (y, _m), c in dc.bulk.items():
        e = inner(z, y)
        if e > 709.0:
            raise OverflowError(f"tilt {z.components} overflows at displacement {y}")
        terms.append(c * math.exp(e))
    return math.fsum(terms)


def solve_boundary(dc: DirectCorrelation, n=None, tol: float = BOUNDARY_TOL,
                   s_max: float = S_MAX) -> DualVector:
    """Boundary dual ``s* n`` with ``rho(s* n) = 1`` by bisection over ``s >= 0``.

    Raises DivergenceError when ``rho(0) >= 1`` (no crossing on the ray:
    beta is too close to critical for this horizon) or when ``rho`` stays
    below 1 up to ``s_max``.
    """
    if n is None:
        n = dc.direction.unit()
    n = n if isinstance(n, DualVector) else DualVector(tuple(n))
    if n.is_zero():
        raise ContractViolation("direction must be nonzero")
    u = n.unit() if abs(n.norm() - 1.0) > 1e-12 else n

    def f(s):
        return perron_root(dc, u.scaled(s)) - 1.0

    f0 = f(0.0)
    if f0 >= 0.0:
        raise DivergenceError(
            f"bulk mass {f0 + 1.0:.6g} >= 1 at zero tilt: no boundary crossing along "
            f"{u.components} (beta too close to critical for horizon {dc.horizon})")
    lo, hi = 0.0, 1.0
    while True:
        try:
            fh = f(hi)
        except OverflowError:
            fh = math.inf
        if fh >= 0.0:
            break
        lo = hi
        hi *= 2.0
        if hi > s_max:
            raise DivergenceError(f"no boundary crossing along {u.components} for s <= {s_max}")
    # bisect to floating-point exhaustion of the bracket
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm >= 0.0:
            hi = mid
        else:
            lo = mid
    s = lo if abs(f(lo)) <= abs(f(hi)) else hi
    if abs(f(s)) > tol:
        raise DivergenceError(f"bisection stalled at |rho - 1| = {abs(f(s)):.3g} > {tol}")
    return DualVector(u.scaled(s).components, on_boundary=True)


def grid_directions(d: int, resolution: int) -> list[tuple[float, ...]]:
    """Uniform direction grid.

    d=2 directions are built from the first quadrant by exact quarter turns so
    that the grid is invariant under the square-lattice rotations whenever
    ``resolution`` is a multiple of 4.  d=3 uses a Fibonacci spiral.
    """
    if d == 1:
        return [(1.0,), (-1.0,)]
    if d == 2:
        if resolution % 4 == 0:
            q = resolution // 4
            base = [(math.cos(2 * math.pi * k / resolution), math.sin(2 * math.pi * k / resolution))
                    for k in range(q)]
            base[0] = (1.0, 0.0)
            out = list(base)
            for _ in range(3):
                base = [(-y, x) for x, y in base]
                out.extend(base)
            return out
        return [(math.cos(2 * math.pi * k / resolution), math.sin(2 * math.pi * k / resolution))
                for k in range(resolution)]
    if d == 3:
        golden = math.pi * (3.0 - math.sqrt(5.0))
        out = []
        for k in range(resolution):
            zc = 1.0 - 2.0 * (k + 0.5) / resolution
            r = math.sqrt(1.0 - zc * zc)
            out.append((r * math.cos(golden * k), r * math.sin(golden * k), zc))
        return out
    raise DomainError(f"no direction grid for d={d}")


@dataclass
class WulffBody:
    """Sampled boundary of the body of convergent tilts."""

    dim: int
    directions: list[tuple[float, ...]]
    duals: list[tuple[float, ...]]
    horizon: int | None = None
    tol: float = BOUNDARY_TOL
    beta: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.directions) != len(self.duals):
            raise ContractViolation("directions and duals differ in length")
        for n, t in zip(self.directions, self.duals):
            if sum(a * b for a, b in zip(n, t)) <= 0.0:
                raise ContractViolation(f"origin is not interior: sample {t} along {n}")
        self._spline = None
        if self.dim == 2:
            self._angles = np.array([math.atan2(n[1], n[0]) % (2 * math.pi) for n in self.directions])
            order = np.argsort(self._angles, kind="stable")
            self._order = order
            self._radii = np.array([math.hypot(*t) for t in self.duals])

    @classmethod
    def from_radial(cls, radius_fn, resolution: int, **kw) -> "WulffBody":
        """Synthetic planar body with boundary ``r(phi) (cos phi, sin phi)``."""
        dirs = grid_directions(2, resolution)
        duals = []
        for n in dirs:
            r = radius_fn(math.atan2(n[1], n[0]))
            duals.append((r * n[0], r * n[1]))
        return cls(2, dirs, duals, **kw)

    def radius(self, k: int) -> float:
        return math.hypot(*self.duals[k])

    # -- planar boundary curve -------------------------------------------------
    def _curve(self) -> CubicSpline:
        if self._spline is None:
            ang = self._angles[self._order]
            rad = self._radii[self._order]
            phi = np.append(ang, ang[0] + 2 * math.pi)
            r = np.append(rad, rad[0])
            self._spline = CubicSpline(phi, r, bc_type="periodic")
        return self._spline

    def _point(self, phi: float) -> np.ndarray:
        r = float(self._curve()(phi))
        return r * np.array([math.cos(phi), math.sin(phi)])

    def outward_normals(self) -> list[tuple[float, ...]]:
        """Unit outward normals at the samples (from the interpolating curve)."""
        if self.dim == 1:
            return [(1.0,) if t[0] > 0 else (-1.0,) for t in self.duals]
        if self.dim != 2:
            raise DomainError("normals are implemented for d <= 2")
        spl = self._curve()
        out = []
        for phi in self._angles:
            r = float(spl(phi))
            dr = float(spl(phi, 1))
            # tangent of r(phi)(cos, sin) is (dr cos - r sin, dr sin + r cos)
            tx = dr * math.cos(phi) - r * math.sin(phi)
            ty = dr * math.sin(phi) + r * math.cos(phi)
            nrm = math.hypot(tx, ty)
            out.append((ty / nrm, -tx / nrm))
        return out

    def support_fn(self, x) -> float:
        """``xi(x) = max_{t in body} (t, x)``.

        Starts from the best sampled boundary point and refines the maximum on
        the interpolating boundary curve between the neighbouring samples.
        Integer vectors are reduced to their primitive direction first so that
        ``xi(k x) = k xi(x)`` holds exactly for primitive ``x``.
        """
        xs = tuple(x)
        if len(xs) != self.dim:
            raise ContractViolation(f"dimension mismatch: {len(xs)} vs {self.dim}")
        if all(isinstance(c, (int, np.integer)) for c in xs):
            g = math.gcd(*[abs(int(c)) for c in xs])
            if g == 0:
                return 0.0
            if g > 1:
                return g * self.support_fn(tuple(int(c) // g for c in xs))
        xv = np.asarray(xs, dtype=float)
        vals = [float(np.dot(t, xv)) for t in self.duals]
        best = int(np.argmax(vals))
        if self.dim != 2:
            return vals[best]
        phi0 = self._angles[best]
        step = 2 * math.pi / len(self.duals)

        def neg(phi):
            return -float(np.dot(self._point(phi), xv))

        res = minimize_scalar(neg, bounds=(phi0 - step, phi0 + step), method="bounded",
                              options={"xatol": 1e-12})
        return max(vals[best], -float(res.fun))

    def to_json(self) -> dict:
        return {"directions": [list(n) for n in self.directions],
                "duals": [list(t) for t in self.duals],
                "N": self.horizon, "tol": self.tol, "beta": self.beta, "dim": self.dim}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "WulffBody":
        return cls(data["dim"], [tuple(n) for n in data["directions"]],
                   [tuple(t) for t in data["duals"]], data.get("N"), data.get("tol", BOUNDARY_TOL),
                   data.get("beta"))


def support_consistency(body: WulffBody, tol: float = 1e-6) -> tuple[bool, float]:
    """Check that the tangent line at every sample supports all other samples.

    For each sample ``t_i`` with outward normal ``m_i`` the body must satisfy
    ``(t_j, m_i) <= (t_i, m_i) (1 + tol)`` for all ``j``.  Returns the verdict
    and the worst relative excess.
    """
    normals = body.outward_normals()
    T = np.asarray(body.duals, dtype=float)
    worst = -math.inf
    for ti, mi in zip(T, normals):
        mi = np.asarray(mi)
        h = float(ti @ mi)
        excess = float(np.max(T @ mi)) / h - 1.0
        worst = max(worst, excess)
    return worst <= tol, worst


def build_body(model, N: int, resolution: int = 64, tol: float = BOUNDARY_TOL,
               cap: int | None = None) -> WulffBody:
    """Solve the boundary along every grid direction (one decomposition per direction)."""
    d = model.dim
    if d == 2 and resolution < 4:
        raise DataError("resolution must be at least 4 in d=2")
    dirs = grid_directions(d, resolution)
    duals = []
    for n in dirs:
        try:
            dc = direct_correlation(model, n, N, cap=cap)
            t = solve_boundary(dc, n, tol=tol)
        except OzlabError as exc:
            raise type(exc)(f"direction {n}: {exc}") from exc
        duals.append(t.components)
    body = WulffBody(d, dirs, duals, N, tol, model.beta)
    ok, worst = support_consistency(body) if d <= 2 else (True, 0.0)
    body.meta.update({"support_consistent": ok, "support_worst_excess": worst})
    return body


@dataclass
class CurvatureReport:
    angles: list[float]
    kappa: list[float]
    err: list[float]
    kappa_min: float
    kappa_min_err: float
    step: float
    step_coarse: float
    spikes: list[int]

    def excludes_zero(self) -> bool:
        return self.kappa_min - self.kappa_min_err > 0.0

    def to_csv(self) -> str:
        lines = ["angle,kappa,err"]
        for a, k, e in zip(self.angles, self.kappa, self.err):
            lines.append(f"{a!r},{k!r},{e!r}")
        return "\n".join(lines) + "\n"


def _polar_curvature(r, dr, ddr):
    return (r * r + 2 * dr * dr - r * ddr) / (r * r + dr * dr) ** 1.5


def curvature(body: WulffBody, spike_factor: float = 10.0) -> CurvatureReport:
    """Curvature of a planar boundary from central differences in the angle.

    Differences use the sample spacing ``h`` and ``2h``; the error estimate is
    the Richardson difference ``|k_h - k_2h| / 3`` of the second-order scheme.
    Samples whose curvature exceeds ``spike_factor`` times the median, or whose
    error estimate exceeds half the value, are flagged as non-smooth.
    """
    if body.dim != 2:
        raise DomainError("curvature is implemented for planar bodies only")
    M = len(body.duals)
    if M < 32:
        raise DataError(f"curvature needs resolution >= 32, got {M}")
    order = body._order
    ang = body._angles[order]
    r = body._radii[order]
    gaps = np.diff(np.append(ang, ang[0] + 2 * math.pi))
    h = 2 * math.pi / M
    if np.max(np.abs(gaps - h)) > 1e-9:
        raise DataError("curvature needs a uniform angular grid")

    def kappa(step):
        rp = np.roll(r, -step)
        rm = np.roll(r, step)
        hh = step * h
        return _polar_curvature(r, (rp - rm) / (2 * hh), (rp - 2 * r + rm) / hh ** 2)

    k1 = kappa(1)
    k2 = kappa(2)
    err = np.abs(k1 - k2) / 3.0
    med = float(np.median(k1))
    spikes = [int(i) for i in range(M)
              if (med > 0 and k1[i] > spike_factor * med) or err[i] > 0.5 * abs(k1[i])]
    i_min = int(np.argmin(k1))
    return CurvatureReport([float(a) for a in ang], [float(k) for k in k1], [float(e) for e in err],
                           float(k1[i_min]), float(err[i_min]), h, 2 * h, spikes)


@dataclass(frozen=True)
class XiComparison:
    support: float
    decay: float
    decay_lower: float
    decay_upper: float

    @property
    def discrepancy(self) -> float:
        return abs(self.support - self.decay)


def primitive_directions(d: int, max_l1: int) -> list[tuple[int, ...]]:
    out = []
    for v in np.ndindex(*([2 * max_l1 + 1] * d)):
        x = tuple(int(c) - max_l1 for c in v)
        if 0 < sum(abs(c) for c in x) <= max_l1 and math.gcd(*[abs(c) for c in x]) == 1:
            out.append(x)
    return out


def xi_consistency(body: WulffBody, table: TwoPointTable, directions=None) -> dict:
    """``|support_fn(x) - decay_rate_estimate(x)|`` on lattice directions the table can resolve."""
    if body.dim != table.dim:
        raise ContractViolation("body and table dimensions differ")
    if body.beta is not None and body.beta != table.beta:
        raise ContractViolation("body and table come from different beta")
    if directions is None:
        directions = primitive_directions(table.dim, 2)
    out = {}
    for x in directions:
        x = as_point(x)
        try:
            est = decay_rate_estimate(table, x)
        except DataError:
            continue
        out[x] = XiComparison(body.support_fn(x), est.value, est.lower, est.upper)
    return out
