"""Weighted least-squares fits of ``g(x) ~ Psi |x|^-p exp(-xi |x|)``."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ozlab.errors import DataError, FitError

MIN_POINTS = 6
MAX_REL_ERR = 0.3
COND_LIMIT = 1e12


@dataclass
class FitResult:
    xi: float
    p: float
    log_psi: float
    cov: list[list[float]]
    chi2: float
    dof: int
    free_p: bool

    @property
    def psi(self) -> float:
        return math.exp(self.log_psi)

    @property
    def chi2_dof(self) -> float:
        return self.chi2 / self.dof if self.dof > 0 else math.nan

    def sigma(self, name: str) -> float:
        names = ["log_psi", "p", "xi"] if self.free_p else ["log_psi", "xi"]
        i = names.index(name)
        return math.sqrt(self.cov[i][i])

    def to_json(self) -> dict:
        out = {"xi": self.xi, "p": self.p, "psi": self.psi, "log_psi": self.log_psi,
               "cov": self.cov, "chi2": self.chi2, "dof": self.dof, "chi2_dof": self.chi2_dof,
               "xi_err": self.sigma("xi")}
        if self.free_p:
            out["p_err"] = self.sigma("p")
        return out


@dataclass
class OzFit:
    direction: tuple
    free: FitResult
    constrained: FitResult
    x_min: float
    x_max: float
    n_points: int
    window_ok: bool
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"direction": list(self.direction), "window": [self.x_min, self.x_max],
                "n_points": self.n_points, "window_ok": self.window_ok,
                "free": self.free.to_json(), "constrained": self.constrained.to_json(), **self.extra}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def _wls(A: np.ndarray, y: np.ndarray, sigma: np.ndarray):
    Aw = A / sigma[:, None]
    yw = y / sigma
    if np.linalg.cond(Aw) > COND_LIMIT:
        raise FitError("ill-conditioned design matrix")
    coef, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
    cov = np.linalg.inv(Aw.T @ Aw)
    chi2 = float(np.sum((yw - Aw @ coef) ** 2))
    return coef, cov, chi2


def fit_points(r, g, err, d: int, p_fixed: float | None = None) -> FitResult:
    """Fit ``log g = log Psi - p log r - xi r`` with delta-method weights ``err / g``."""
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    err = np.asarray(err, dtype=float)
    if np.any(g <= 0):
        raise DataError("nonpositive correlations in the fit window")
    y = np.log(g)
    sigma = err / g
    if p_fixed is None:
        A = np.column_stack([np.ones_like(r), -np.log(r), -r])
        coef, cov, chi2 = _wls(A, y, sigma)
        return FitResult(float(coef[2]), float(coef[1]), float(coef[0]), cov.tolist(), chi2,
                         len(r) - 3, True)
    A = np.column_stack([np.ones_like(r), -r])
    coef, cov, chi2 = _wls(A, y + p_fixed * np.log(r), sigma)
    return FitResult(float(coef[1]), float(p_fixed), float(coef[0]), cov.tolist(), chi2, len(r) - 2, False)


def oz_fit(estimates, direction, d: int, window: tuple[float, float] | None = None) -> OzFit:
    """Free and ``p = (d-1)/2`` fits on estimates whose displacement is a positive
    multiple of ``direction`` and whose length lies in ``window``.

    ``window_ok`` records whether ``x_min >= 3 / xi`` (three correlation
    lengths) for the constrained fit.
    """
    direction = tuple(direction)
    dn = math.sqrt(sum(c * c for c in direction))
    if dn == 0:
        raise DataError("direction must be nonzero")
    pts = []
    for e in estimates:
        x = tuple(e.x)
        if len(x) != len(direction):
            continue
        k = sum(a * b for a, b in zip(x, direction)) / dn ** 2
        if k <= 0 or any(abs(a - k * b) > 1e-12 for a, b in zip(x, direction)):
            continue
        r = k * dn
        if window is not None and not window[0] <= r <= window[1]:
            continue
        pts.append((r, e.mean, e.stderr))
    pts.sort()
    if len(pts) < MIN_POINTS:
        raise DataError(f"need at least {MIN_POINTS} points in the fit window, got {len(pts)}")
    r, g, err = map(np.asarray, zip(*pts))
    if np.any(g <= 0):
        raise DataError("nonpositive correlation estimates in the fit window")
    rel = err / g
    if np.any(rel >= MAX_REL_ERR):
        raise DataError(f"relative errors up to {rel.max():.3g} exceed {MAX_REL_ERR}")
    free = fit_points(r, g, err, d)
    cons = fit_points(r, g, err, d, p_fixed=(d - 1) / 2)
    x_min, x_max = float(r.min()), float(r.max())
    ok = cons.xi > 0 and x_min >= 3.0 / cons.xi
    return OzFit(direction, free, cons, x_min, x_max, len(r), ok)
