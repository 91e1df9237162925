"""Lattice geometry, paths, dual vectors, cones and space-length series.

A :class:`SpaceLengthSeries` is a sparse map ``(x, n) -> coeff`` where ``x`` is
a lattice displacement and ``n`` a path length.  Convolution adds both the
displacements and the lengths, so truncated enumerations satisfy renewal
identities exactly up to the horizon.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from ozlab.errors import ContractViolation, DivergenceError

Point = tuple[int, ...]


def as_point(coords: Iterable[int]) -> Point:
    pt = tuple(int(c) for c in coords)
    if not pt:
        raise ContractViolation("lattice point needs at least one coordinate")
    return pt


def add(x: Sequence[int], y: Sequence[int]) -> Point:
    if len(x) != len(y):
        raise ContractViolation(f"dimension mismatch: {len(x)} vs {len(y)}")
    return tuple(a + b for a, b in zip(x, y))


def sub(x: Sequence[int], y: Sequence[int]) -> Point:
    if len(x) != len(y):
        raise ContractViolation(f"dimension mismatch: {len(x)} vs {len(y)}")
    return tuple(a - b for a, b in zip(x, y))


def l1(x: Sequence[int]) -> int:
    return sum(abs(c) for c in x)


def unit_steps(d: int) -> tuple[Point, ...]:
    """The 2d nearest-neighbour steps of Z^d, ordered +e1, -e1, +e2, ..."""
    steps = []
    for i in range(d):
        for s in (1, -1):
            v = [0] * d
            v[i] = s
            steps.append(tuple(v))
    return tuple(steps)


def inner(t, x) -> float:
    """Euclidean scalar product of a dual vector with a lattice vector."""
    tc = t.components if isinstance(t, DualVector) else tuple(t)
    if len(tc) != len(x):
        raise ContractViolation(f"dimension mismatch: {len(tc)} vs {len(x)}")
    return float(sum(a * b for a, b in zip(tc, x)))


@dataclass(frozen=True)
class DualVector:
    components: tuple[float, ...]
    on_boundary: bool = False

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if not comps or not all(math.isfinite(c) for c in comps):
            raise ContractViolation(f"dual vector needs finite components, got {self.components}")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    def norm(self) -> float:
        return math.hypot(*self.components)

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.components)

    def scaled(self, s: float) -> "DualVector":
        return DualVector(tuple(s * c for c in self.components))

    def unit(self) -> "DualVector":
        r = self.norm()
        if r == 0.0:
            raise ContractViolation("zero dual vector has no direction")
        return self.scaled(1.0 / r)

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)


def dual(*components) -> DualVector:
    if len(components) == 1 and not isinstance(components[0], (int, float)):
        components = tuple(components[0])
    return DualVector(tuple(components))


@dataclass(frozen=True)
class LatticePath:
    """Ordered vertices with consecutive differences in ``step_support``.

    ``step_support=None`` means nearest-neighbour unit steps.  A single vertex
    is the empty path (length 0).
    """

    vertices: tuple[Point, ...]
    step_support: frozenset | None = None

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        if not verts:
            raise ContractViolation("a path has at least one vertex")
        d = len(verts[0])
        support = self.step_support
        if support is None:
            support = frozenset(unit_steps(d))
        else:
            support = frozenset(as_point(s) for s in support)
        for a, b in zip(verts, verts[1:]):
            if len(b) != d:
                raise ContractViolation("mixed dimensions in path")
            step = sub(b, a)
            if step not in support:
                raise ContractViolation(f"step {step} from {a} to {b} not in step support")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "step_support", support)

    @classmethod
    def from_steps(cls, steps: Iterable[Sequence[int]], start: Sequence[int] | None = None,
                   step_support=None) -> "LatticePath":
        steps = [as_point(s) for s in steps]
        if start is None:
            if not steps:
                raise ContractViolation("need a start point or at least one step")
            start = (0,) * len(steps[0])
        verts = [as_point(start)]
        for s in steps:
            verts.append(add(verts[-1], s))
        return cls(tuple(verts), step_support)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def __len__(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> Point:
        return self.vertices[0]

    @property
    def end(self) -> Point:
        return self.vertices[-1]

    def displacement(self) -> Point:
        return sub(self.end, self.start)

    def is_self_avoiding(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)

    def translated(self, shift: Sequence[int]) -> "LatticePath":
        return LatticePath(tuple(add(v, shift) for v in self.vertices), self.step_support)

    def rooted(self) -> "LatticePath":
        """The same path translated to start at the origin."""
        return self.translated(tuple(-c for c in self.start))

    def concat(self, other: "LatticePath") -> "LatticePath":
        """Concatenation ``self ⨿ other``; ``other`` is translated onto our end point."""
        other = other.translated(sub(self.end, other.start))
        return LatticePath(self.vertices + other.vertices[1:], self.step_support | other.step_support)

    def subpath(self, i: int, j: int) -> "LatticePath":
        return LatticePath(self.vertices[i:j + 1], self.step_support)


@dataclass(frozen=True)
class Cone:
    """Forward cone ``{v : (t, v) > (1 - delta) xi(v)}`` around the dual axis ``t``."""

    axis: DualVector
    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ContractViolation(f"cone aperture delta must lie in (0, 1), got {self.delta}")

    def contains(self, v: Sequence[int], xi: Callable[[Sequence[int]], float]) -> bool:
        return inner(self.axis, v) > (1.0 - self.delta) * xi(v)


Key = tuple[Point, int]


class SpaceLengthSeries:
    """Sparse nonnegative coefficients indexed by (displacement, length).

    Coefficients may be any exact or floating numeric type; zero entries are
    dropped.  Instances are treated as immutable.
    """

    __slots__ = ("dim", "horizon", "_coeffs")

    def __init__(self, dim: int, horizon: int, coeffs: Mapping[Key, float] | None = None):
        if dim < 1:
            raise ContractViolation("dimension must be >= 1")
        if horizon < 0:
            raise ContractViolation("horizon must be >= 0")
        self.dim = int(dim)
        self.horizon = int(horizon)
        clean: dict[Key, float] = {}
        for (x, n), c in (coeffs or {}).items():
            x = as_point(x)
            if len(x) != self.dim:
                raise ContractViolation(f"entry {x} has wrong dimension for a {self.dim}-d series")
            if c < 0:
                raise ContractViolation(f"negative coefficient {c} at {(x, n)}")
            if n < 0 or n > self.horizon or c == 0:
                continue
            clean[(x, int(n))] = c
        self._coeffs = clean

    @classmethod
    def unit(cls, dim: int, horizon: int, one=1) -> "SpaceLengthSeries":
        return cls(dim, horizon, {((0,) * dim, 0): one})

    @classmethod
    def atom(cls, x: Sequence[int], n: int, coeff, horizon: int) -> "SpaceLengthSeries":
        x = as_point(x)
        return cls(len(x), horizon, {(x, n): coeff})

    def __getitem__(self, key: Key):
        x, n = key
        return self._coeffs.get((tuple(x), n), 0)

    def __contains__(self, key) -> bool:
        return key in self._coeffs

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self) -> Iterator[Key]:
        return iter(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def as_dict(self) -> dict[Key, float]:
        return dict(self._coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpaceLengthSeries):
            return NotImplemented
        return (self.dim, self.horizon, self._coeffs) == (other.dim, other.horizon, other._coeffs)

    def __repr__(self) -> str:
        return f"SpaceLengthSeries(dim={self.dim}, horizon={self.horizon}, entries={len(self)})"

    def truncated(self, horizon: int) -> "SpaceLengthSeries":
        return SpaceLengthSeries(self.dim, min(horizon, self.horizon), self._coeffs)

    def spatial(self) -> dict[Point, float]:
        """Coefficients with the length variable summed out."""
        out: dict[Point, float] = defaultdict(float)
        for (x, _n), c in self._coeffs.items():
            out[x] += c
        return dict(out)

    def at(self, x: Sequence[int]) -> float:
        """Sum over lengths of the coefficients at displacement ``x``."""
        x = tuple(x)
        return sum(c for (y, _n), c in self._coeffs.items() if y == x)

    def total(self):
        return sum(self._coeffs.values())

    def tilted_total(self, t) -> float:
        """``sum c(x, n) exp((t, x))``."""
        tc = t.components if isinstance(t, DualVector) else tuple(t)
        return math.fsum(c * math.exp(inner(tc, x)) for (x, _n), c in self._coeffs.items())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x_{i + 1}" for i in range(self.dim)] + ["n", "coeff"])
        for (x, n) in sorted(self._coeffs):
            c = self._coeffs[(x, n)]
            w.writerow([*x, n, repr(float(c))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, horizon: int | None = None) -> "SpaceLengthSeries":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        dim = len(header) - 2
        if dim < 1 or header[-2:] != ["n", "coeff"]:
            raise ContractViolation(f"unexpected series CSV header {header}")
        coeffs = {}
        for r in body:
            if not r:
                continue
            x = tuple(int(v) for v in r[:dim])
            coeffs[(x, int(r[dim]))] = float(r[dim + 1])
        if horizon is None:
            horizon = max((n for _x, n in coeffs), default=0)
        return cls(dim, horizon, coeffs)


def _check_compatible(a: SpaceLengthSeries, b: SpaceLengthSeries) -> None:
    if a.dim != b.dim:
        raise ContractViolation(f"dimension mismatch: {a.dim} vs {b.dim}")


def _by_length(s: SpaceLengthSeries) -> dict[int, list[tuple[Point, float]]]:
    out: dict[int, list] = defaultdict(list)
    for (x, n), c in s.items():
        out[n].append((x, c))
    return out


def convolve(a: SpaceLengthSeries, b: SpaceLengthSeries) -> SpaceLengthSeries:
    """``(a*b)(x, n) = sum a(y, m) b(x - y, n - m)``, horizon = min of the inputs."""
    _check_compatible(a, b)
    horizon = min(a.horizon, b.horizon)
    acc: dict[Key, float] = {}
    bl = _by_length(b)
    for (y, m), ca in a.items():
        for n2 in range(0, horizon - m + 1):
            for z, cb in bl.get(n2, ()):
                key = (add(y, z), m + n2)
                acc[key] = acc.get(key, 0) + ca * cb
    return SpaceLengthSeries(a.dim, horizon, acc)


def add_series(a: SpaceLengthSeries, b: SpaceLengthSeries) -> SpaceLengthSeries:
    _check_compatible(a, b)
    acc = a.as_dict()
    for k, c in b.items():
        acc[k] = acc.get(k, 0) + c
    return SpaceLengthSeries(a.dim, min(a.horizon, b.horizon), acc)


def geometric_sum(c: SpaceLengthSeries) -> SpaceLengthSeries:
    """``sum_{k>=0} c^{*k}`` up to the horizon of ``c``.

    Solved layer by layer in the length variable from ``G = unit + c * G``.
    """
    zero = (0,) * c.dim
    if c[(zero, 0)]:
        raise DivergenceError("zero-length atom at the origin makes the geometric sum diverge")
    one = 1.0 if any(isinstance(v, float) for v in c._coeffs.values()) else 1
    cl = _by_length(c)
    layers: list[dict[Point, float]] = [{zero: one}]
    c0 = cl.get(0, [])
    if c0:
        raise DivergenceError("zero-length atoms allow unbounded concatenation at fixed length")
    for n in range(1, c.horizon + 1):
        layer: dict[Point, float] = {}
        for m in range(1, n + 1):
            for y, cy in cl.get(m, ()):
                for z, gz in layers[n - m].items():
                    key = add(y, z)
                    layer[key] = layer.get(key, 0) + cy * gz
        layers.append(layer)
    coeffs = {(x, n): v for n, layer in enumerate(layers) for x, v in layer.items()}
    return SpaceLengthSeries(c.dim, c.horizon, coeffs)
