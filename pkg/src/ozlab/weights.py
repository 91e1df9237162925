"""Path-weight models and horizon-bounded certification of the weight axioms.

Four properties are checked on enumerable path families: finite energy
(conditional weights bounded below by ``exp(-C2 |lambda|)``), splitting
(constant ``C3``) and exponential mixing (``C4``, ``theta``).  Strict
exponential decay needs the inverse correlation length and is checked in
:mod:`ozlab.renewal` instead.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterator

from ozlab.errors import DomainError
from ozlab.lattice import LatticePath, Point, add, sub, unit_steps

AXIOMS = ("decay", "finite_energy", "splitting", "mixing")


@dataclass(frozen=True)
class WeightedPathModel:
    """A family of admissible lattice paths with positive weights.

    ``log_weight`` returns ``log q(path)`` for admissible paths.  ``admissible``
    decides whether the concatenation of two paths is admissible.
    """

    name: str
    dim: int
    step_support: tuple[Point, ...]
    log_weight: Callable[[LatticePath], float]
    admissible: Callable[[LatticePath, LatticePath], bool]
    params: dict = field(default_factory=dict)
    # optional exact ``-log q(lam | eta) / |lam|``; avoids rounding in differences
    conditional_rate: Callable[[LatticePath, LatticePath], float] | None = None

    def weight(self, path: LatticePath) -> float:
        return math.exp(self.log_weight(path))

    def log_conditional(self, lam: LatticePath, eta: LatticePath) -> float:
        """``log q(lam | eta) = log q(lam ⨿ eta) - log q(eta)``."""
        if self.conditional_rate is not None:
            return -self.conditional_rate(lam, eta) * len(lam)
        return self.log_weight(lam.concat(eta)) - self.log_weight(eta)

    @property
    def beta(self) -> float:
        return self.params["beta"]


def saw_model(beta: float, d: int) -> WeightedPathModel:
    """Self-avoiding walks on Z^d with weight ``exp(-beta |lambda|)``."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    beta = float(beta)

    def log_weight(path: LatticePath) -> float:
        return -beta * len(path)

    def admissible(lam: LatticePath, eta: LatticePath) -> bool:
        return lam.concat(eta).is_self_avoiding()

    def conditional_rate(lam: LatticePath, eta: LatticePath) -> float:
        return beta

    return WeightedPathModel("saw", d, unit_steps(d), log_weight, admissible, {"beta": beta},
                             conditional_rate)


def iter_saws(d: int, max_len: int, start: Point | None = None) -> Iterator[tuple[Point, ...]]:
    """All self-avoiding unit-step walks of length <= max_len, depth first.

    Yields vertex tuples; the empty walk comes first.
    """
    steps = unit_steps(d)
    origin = tuple(start) if start is not None else (0,) * d
    path = [origin]
    occupied = {origin}

    def rec():
        yield tuple(path)
        if len(path) - 1 == max_len:
            return
        here = path[-1]
        for s in steps:
            nxt = add(here, s)
            if nxt in occupied:
                continue
            path.append(nxt)
            occupied.add(nxt)
            yield from rec()
            occupied.discard(nxt)
            path.pop()

    yield from rec()


@dataclass
class AxiomReport:
    axiom: str
    constant: float
    passed: bool
    theta: float | None = None
    instances: int = 0
    witness_paths: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "axiom": self.axiom,
            "constant": self.constant,
            "pass": self.passed,
            "witness_paths": [[list(v) for v in p] for p in self.witness_paths],
        }
        if self.theta is not None:
            out["theta"] = self.theta
        out["instances"] = self.instances
        out.update(self.extra)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _paths(model: WeightedPathModel, max_len: int) -> list[LatticePath]:
    if model.name != "saw":
        raise NotImplementedError(f"no path enumerator for model {model.name!r}")
    return [LatticePath(v) for v in iter_saws(model.dim, max_len)]


def _verdict(witnessed: float, constant: float | None) -> bool:
    if not math.isfinite(witnessed):
        return False
    return constant is None or witnessed <= constant


def check_finite_energy(model: WeightedPathModel, max_len: int,
                        constant: float | None = None) -> AxiomReport:
    """Smallest ``C2`` with ``q(lam | eta) >= exp(-C2 |lam|)`` over pairs with
    ``|lam| + |eta| <= max_len``.

    If ``constant`` is given the report passes iff the witnessed value does
    not exceed it.
    """
    paths = _paths(model, max_len)
    worst, witness, count = 0.0, [], 0
    for lam in paths:
        if len(lam) == 0:
            continue
        for eta in paths:
            if len(lam) + len(eta) > max_len:
                continue
            if not model.admissible(lam, eta):
                continue
            count += 1
            if model.conditional_rate is not None:
                c2 = model.conditional_rate(lam, eta)
            else:
                c2 = -model.log_conditional(lam, eta) / len(lam)
            if c2 > worst or not witness:
                worst, witness = c2, [lam.vertices, eta.vertices]
    return AxiomReport("finite_energy", worst, _verdict(worst, constant), instances=count,
                       witness_paths=witness)


def _path_sums(model: WeightedPathModel, paths: list[LatticePath]):
    g = defaultdict(float)
    for p in paths:
        g[p.end] += model.weight(p)
    return g


def check_splitting(model: WeightedPathModel, max_len: int,
                    constant: float | None = None) -> AxiomReport:
    """Smallest ``C3`` with ``sum_{0->x->y} q <= C3 g(x) g(y - x)`` at the horizon."""
    paths = _paths(model, max_len)
    g = _path_sums(model, paths)
    through: dict[tuple[Point, Point], float] = defaultdict(float)
    for p in paths:
        w = model.weight(p)
        y = p.end
        for x in set(p.vertices[1:]):
            if x != y:
                through[(x, y)] += w
    worst, witness = 0.0, []
    for (x, y), lhs in sorted(through.items()):
        rhs = g[x] * g[sub(y, x)]
        ratio = lhs / rhs
        if ratio > worst:
            worst, witness = ratio, [(x,), (y,)]
    return AxiomReport("splitting", worst, _verdict(worst, constant), instances=len(through),
                       witness_paths=witness)


def _distance(x: Point, y: Point, norm: str) -> float:
    diff = sub(x, y)
    if norm == "euclidean":
        return math.sqrt(sum(c * c for c in diff))
    if norm == "l1":
        return float(sum(abs(c) for c in diff))
    if norm == "linf":
        return float(max(abs(c) for c in diff))
    raise DomainError(f"unknown norm {norm!r}")


def check_mixing(model: WeightedPathModel, max_len: int, theta: float = 0.5,
                 norm: str = "euclidean", constant: float | None = None) -> AxiomReport:
    """Smallest ``C4`` bounding ``q(lam | eta ⨿ g1) / q(lam | eta ⨿ g2)`` by
    ``exp(C4 sum_{x in lam, y in g1 ∪ g2} theta^|x - y|)``.

    Quadruples with ``|lam| >= 1`` and total length of each concatenation at
    most ``max_len`` are enumerated.  ``extra["max_ratio_deviation"]`` records
    the largest ``|ratio - 1|`` seen.
    """
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    paths = _paths(model, max_len)
    by_len = defaultdict(list)
    for p in paths:
        by_len[len(p)].append(p)
    worst, witness, count, max_dev = 0.0, [], 0, 0.0
    for lam in paths:
        if len(lam) == 0:
            continue
        for eta in paths:
            budget = max_len - len(lam) - len(eta)
            if budget < 0 or not model.admissible(lam, eta):
                continue
            head = lam.concat(eta)
            tails = [gm for gm in paths if len(gm) <= budget and model.admissible(head, gm)]
            conds = [model.log_conditional(lam, eta.concat(gm)) for gm in tails]
            placed = [head.concat(gm).vertices[len(head.vertices):] for gm in tails]
            for (i, a), (j, b) in itertools.combinations_with_replacement(enumerate(conds), 2):
                count += 1
                log_ratio = abs(a - b)
                max_dev = max(max_dev, abs(math.expm1(log_ratio)))
                if log_ratio == 0.0:
                    continue
                others = placed[i] + placed[j]
                spread = sum(theta ** _distance(x, y, norm) for x in lam.vertices for y in others)
                c4 = log_ratio / spread if spread > 0 else math.inf
                if c4 > worst:
                    worst = c4
                    witness = [lam.vertices, eta.vertices, tails[i].vertices, tails[j].vertices]
    return AxiomReport("mixing", worst, _verdict(worst, constant), theta=theta, instances=count,
                       witness_paths=witness,
                       extra={"norm": norm, "max_ratio_deviation": max_dev})
