"""Multiplier values and the variational jump characterization.

For a set ``S`` of positive area the largest average of ``g`` over supersets
of ``S`` is attained by a superlevel union ``S | {g >= L}``.  ``L`` is the
fixed point of ``mu -> mean(g, S | {g >= mu})``, located by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMask
from .torus import area, mean_over

__all__ = [
    "Coefficient",
    "InitialData",
    "Regime",
    "VariationalReport",
    "lambda_of",
    "alpha_of",
    "capital_lambda",
    "maximizer_set",
    "plateau_area",
    "classify",
    "report",
]

NONDEGENERATE = "Nondegenerate"
JUMP = "Jump"
NONGENERIC = "NonGeneric"


@dataclass(frozen=True)
class Coefficient:
    """Coefficient field ``g`` with bounds ``0 < g0 <= g <= g1 < 1``."""

    values: np.ndarray
    g0: float
    g1: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not (0 < self.g0 <= self.g1 < 1):
            raise ValueError(f"need 0 < g0 <= g1 < 1, got g0={self.g0}, g1={self.g1}")
        if not np.isfinite(v).all() or v.min() < self.g0 or v.max() > self.g1:
            raise ValueError("g violates its declared bounds")

    @classmethod
    def from_values(cls, values) -> "Coefficient":
        v = np.asarray(values, dtype=float)
        return cls(v, float(v.min()), float(v.max()))

    @property
    def default_tol(self) -> float:
        return 1e-9 * max(self.g1 - self.g0, 1.0e-3)


@dataclass(frozen=True)
class InitialData:
    u0: np.ndarray
    support: np.ndarray
    lambda0: float
    alpha0: float

    @classmethod
    def from_field(cls, u0, g) -> "InitialData":
        u0 = np.asarray(u0, dtype=float)
        if (u0 < 0).any():
            raise ValueError("initial data must be nonnegative")
        support = u0 > 0
        if not support.any():
            raise EmptyMask("initial data has empty support")
        gv = _values(g)
        return cls(u0, support, lambda_of(gv, support), alpha_of(gv, support))


@dataclass(frozen=True)
class Regime:
    tag: str
    theta: float = math.nan
    violation_area: float = 0.0
    plateau_area: float = 0.0


@dataclass(frozen=True)
class VariationalReport:
    lambda0: float
    alpha0: float
    Lambda: float
    regime: Regime
    plateau_area: float = field(default=0.0)

    COLUMNS = ("lambda0", "alpha0", "Lambda", "regime", "theta", "violationArea", "plateauArea")

    def as_row(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "alpha0": self.alpha0,
            "Lambda": self.Lambda,
            "regime": self.regime.tag,
            "theta": self.regime.theta,
            "violationArea": self.regime.violation_area,
            "plateauArea": self.plateau_area,
        }


def _values(g) -> np.ndarray:
    if isinstance(g, Coefficient):
        return g.values
    return np.asarray(g, dtype=float)


def _default_tol(g) -> float:
    if isinstance(g, Coefficient):
        return g.default_tol
    return 1e-9 * max(float(np.ptp(_values(g))), 1.0e-3)


def lambda_of(g, mask) -> float:
    """Average of ``g`` over ``mask``."""
    return mean_over(_values(g), mask)


def alpha_of(g, mask) -> float:
    """``int_A (1 - g) / int_A g``."""
    gv = _values(g)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("alpha over an empty set")
    sel = gv[mask]
    return float((1.0 - sel).sum() / sel.sum())


def _superlevel_mean(gv, mask, mu) -> float:
    return mean_over(gv, mask | (gv >= mu))


def capital_lambda(g, mask, width: float = 1e-12) -> float:
    """Largest average of ``g`` over sets containing ``mask``.

    Bisection on the threshold ``mu``: ``F(mu) = mean(g, mask | {g >= mu})``
    exceeds ``mu`` below the optimum and does not above it.
    """
    gv = _values(g)
    mask = np.asarray(mask, dtype=bool)
    lo = lambda_of(gv, mask)
    hi = float(gv.max())
    if hi <= lo:
        return lo
    best = lo
    while hi - lo >= width:
        mid = 0.5 * (lo + hi)
        val = _superlevel_mean(gv, mask, mid)
        best = max(best, val)
        if val > mid:
            lo = mid
        else:
            hi = mid
    return max(best, _superlevel_mean(gv, mask, lo), _superlevel_mean(gv, mask, hi))


def maximizer_set(g, mask, Lambda: float | None = None, tol: float = 1e-12) -> np.ndarray:
    """Canonical maximizer ``mask | {g >= Lambda}``."""
    gv = _values(g)
    mask = np.asarray(mask, dtype=bool)
    if Lambda is None:
        Lambda = capital_lambda(gv, mask)
    return mask | (gv >= Lambda - tol)


def plateau_area(g, Lambda: float, tol: float) -> float:
    """Area of ``{|g - Lambda| < tol}``, where maximizers are not unique."""
    return area(np.abs(_values(g) - Lambda) < tol)


def classify(g, data: InitialData, tol: float | None = None) -> Regime:
    """Sort initial data into the continuity, jump or non-generic regime."""
    gv = _values(g)
    if tol is None:
        tol = _default_tol(g)
    zero = ~data.support
    lam0 = data.lambda0
    if not zero.any():
        return Regime(NONDEGENERATE, theta=math.inf)
    gz = gv[zero]
    n_cells = gv.size
    violation = np.count_nonzero(gz > lam0 + tol) / n_cells
    plateau = np.count_nonzero(np.abs(gz - lam0) <= tol) / n_cells
    if violation > 0:
        return Regime(JUMP, violation_area=violation, plateau_area=plateau)
    if plateau > 0:
        return Regime(NONGENERIC, plateau_area=plateau)
    theta = float(((1.0 - gz) - data.alpha0 * gz).min())
    return Regime(NONDEGENERATE, theta=theta)


def report(g, data: InitialData, tol: float | None = None) -> VariationalReport:
    gv = _values(g)
    regime = classify(g, data, tol)
    Lam = capital_lambda(gv, data.support)
    ptol = _default_tol(g) if tol is None else tol
    return VariationalReport(
        lambda0=data.lambda0,
        alpha0=data.alpha0,
        Lambda=Lam,
        regime=regime,
        plateau_area=plateau_area(gv, Lam, ptol),
    )
