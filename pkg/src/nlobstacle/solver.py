"""Time stepping for the mass-conserving obstacle problem and its relatives.

Three problems are integrated on the torus:

* the Michaelis-Menten regularization
  ``u_t - lap u = -(1-g) u/(u+eps) + alpha(t) g`` with
  ``alpha = int (1-g) f_eps(u) / int g`` (exactly mass conserving),
* the sharp nonlocal obstacle problem
  ``u_t - lap u = -(1 - g/lambda) H(u)``, ``lambda = mean of g over {u > 0}``,
* the classical obstacle problem ``u_t - lap u = f H(u)``.

Diffusion is implicit (exact Fourier solve), reactions are explicit.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import NegativityBreach
from .fieldio import write_field
from .torus import TorusGrid, area, hausdorff, implicit_heat_solve, integrate, laplacian

__all__ = [
    "SolverParams",
    "Trajectory",
    "ClassicalSource",
    "michaelis_menten",
    "regularized_alpha",
    "step_regularized",
    "run_regularized",
    "support_of",
    "run_approx_sequence",
    "step_obstacle",
    "run_obstacle",
    "step_classical",
    "run_classical",
    "default_L0",
]

log = logging.getLogger(__name__)

SCHEMES = ("imex", "explicit")


def default_L0(g0: float, theta: float | None = None, m: float | None = None) -> float:
    """Support threshold multiplier.

    With a nondegeneracy margin ``theta > 0`` this is the smallest ``L0``
    with ``L0 >= 2m`` and ``(1-g0)/(L0+1) <= theta/4``; otherwise
    ``4(1-g0)/g0``.
    """
    if theta is not None and theta > 0 and math.isfinite(theta):
        L0 = 4.0 * (1.0 - g0) / theta - 1.0
        if m is not None:
            L0 = max(L0, 2.0 * m)
        return L0
    return 4.0 * (1.0 - g0) / g0


@dataclass(frozen=True)
class SolverParams:
    eps: float
    dt: float
    T: float
    theta: float = math.nan
    L0: float = 1.0
    scheme: str = "imex"
    record_every: int = 1

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("T must be >= 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.L0 <= 0:
            raise ValueError("L0 must be positive")

    @property
    def threshold(self) -> float:
        return self.L0 * self.eps

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.dt))

    def check_grid(self, n: int) -> None:
        h = 1.0 / n
        if self.scheme == "explicit" and self.dt > h * h / 4 * (1 + 1e-12):
            raise ValueError(f"explicit scheme needs dt <= h^2/4 = {h * h / 4:.3g}")

    def with_(self, **kw) -> "SolverParams":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return SolverParams(**d)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    masses: list = field(default_factory=list)
    support_areas: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    support_masks: list = field(default_factory=list)

    CSV_COLUMNS = ("t", "lambda", "alpha", "mass", "support_area", "hausdorff_to_initial")

    def record(self, t, u, lam, alpha, mask, keep_snapshot=True):
        self.times.append(float(t))
        self.lambdas.append(float(lam))
        self.alphas.append(float(alpha))
        self.masses.append(integrate(u))
        self.support_areas.append(area(mask))
        self.snapshots.append((float(t), u.copy() if keep_snapshot else None))
        self.support_masks.append((float(t), mask))

    def __len__(self):
        return len(self.times)

    def field_at(self, k: int) -> np.ndarray:
        u = self.snapshots[k][1]
        if u is None:
            raise LookupError(f"snapshot {k} was not kept")
        return u

    def mask_at(self, k: int) -> np.ndarray:
        return self.support_masks[k][1]

    def hausdorff_to(self, reference) -> list:
        out = []
        for _, mask in self.support_masks:
            out.append(hausdorff(mask, reference) if mask.any() else math.nan)
        return out

    def write_csv(self, path, reference=None) -> None:
        """Write the scalar time series; ``reference`` defaults to the first support."""
        if reference is None and self.support_masks:
            reference = self.support_masks[0][1]
        hd = self.hausdorff_to(reference) if reference is not None and reference.any() else [
            math.nan] * len(self)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.CSV_COLUMNS)
            for row in zip(self.times, self.lambdas, self.alphas, self.masses,
                           self.support_areas, hd):
                w.writerow([repr(float(v)) for v in row])

    def write_snapshots(self, run_dir, prefix: str = "u") -> list:
        run_dir = Path(run_dir)
        paths = []
        for k, (_, u) in enumerate(self.snapshots):
            if u is None:
                continue
            p = run_dir / f"{prefix}_t{k}.f64"
            write_field(p, u, f"{prefix}_t{k}")
            paths.append(p)
        return paths


# --------------------------------------------------------------------------
# regularized problem


def michaelis_menten(u, eps: float) -> np.ndarray:
    return u / (u + eps)


def regularized_alpha(u, g, eps: float) -> float:
    """Multiplier making the reaction integrate to zero for the current field."""
    return float(((1.0 - g) * michaelis_menten(u, eps)).sum() / g.sum())


def step_regularized(u, g, p: SolverParams) -> tuple[np.ndarray, float, float]:
    """One step of the regularized problem; returns ``(u_new, lambda, alpha)`` of the input field."""
    g = getattr(g, "values", g)
    alpha = regularized_alpha(u, g, p.eps)
    rhs = alpha * g - (1.0 - g) * michaelis_menten(u, p.eps)
    if p.scheme == "imex":
        new = implicit_heat_solve(u + p.dt * rhs, p.dt)
    else:
        new = u + p.dt * (laplacian(u) + rhs)
    low = new.min()
    if low < -1e-12:
        raise NegativityBreach(f"min u = {low:.3g} after step (dt = {p.dt:.3g}, eps = {p.eps:.3g})")
    return new, 1.0 / (1.0 + alpha), alpha


def support_of(u, p: SolverParams) -> np.ndarray:
    """Positivity set seen through the threshold ``L0 * eps``."""
    return np.asarray(u) > p.threshold


def run_regularized(u0eps, g, p: SolverParams, keep_snapshots: bool = True) -> Trajectory:
    g = getattr(g, "values", g)
    u = np.asarray(u0eps, dtype=float).copy()
    if (u < 0).any():
        raise ValueError("initial data must be nonnegative")
    p.check_grid(TorusGrid.of(u).n)
    traj = Trajectory()

    def rec(t):
        a = regularized_alpha(u, g, p.eps)
        traj.record(t, u, 1.0 / (1.0 + a), a, support_of(u, p), keep_snapshots)

    rec(0.0)
    for k in range(1, p.nsteps + 1):
        u, _, _ = step_regularized(u, g, p)
        if k % p.record_every == 0 or k == p.nsteps:
            rec(k * p.dt)
    return traj


def run_approx_sequence(seq, g, p: SolverParams, keep_snapshots: bool = True) -> list:
    """One regularized trajectory per member of ``seq``, all with the same parameters."""
    return [run_regularized(un, g, p, keep_snapshots) for un in seq]


# --------------------------------------------------------------------------
# sharp nonlocal obstacle problem


def step_obstacle(u, g, dt: float, smoothed_g=None) -> tuple[np.ndarray, float]:
    """Projected step of the sharp problem with the multiplier taken at the new time level.

    ``lambda`` is chosen so that it equals the mean of ``g`` over the support
    of the step it produces.  Because the heat solve is linear,
    ``R(u + dt (g/lambda - 1)) = Ru - dt + (dt/lambda) Rg`` and every trial
    ``lambda`` costs one elementwise pass; the fixed-point iteration is
    monotone and stops once the support repeats.

    Returns ``(u_new, lambda)``.  ``smoothed_g`` may carry a precomputed
    ``R g`` for repeated calls.
    """
    g = getattr(g, "values", g)
    pos = u > 0
    if not pos.any():
        raise ValueError("sharp problem needs a nonempty support")
    Ru = implicit_heat_solve(u, dt)
    Rg = implicit_heat_solve(g, dt) if smoothed_g is None else smoothed_g
    lam = float(g[pos].mean())
    for _ in range(_MAX_MULTIPLIER_ITERS):
        v = Ru + dt * (Rg / lam - 1.0)
        new_pos = v > 0
        if not new_pos.any():
            raise ValueError("support vanished during the step")
        if np.array_equal(new_pos, pos):
            break
        pos = new_pos
        lam = float(g[pos].mean())
    else:
        log.warning("multiplier iteration did not settle in %d passes", _MAX_MULTIPLIER_ITERS)
    np.maximum(v, 0.0, out=v)
    return v, lam


_MAX_MULTIPLIER_ITERS = 200


def run_obstacle(u0, g, dt: float, T: float, record_every: int = 1,
                 keep_snapshots: bool = True) -> Trajectory:
    """Sharp nonlocal problem; ``lambda`` is the mean of ``g`` over ``{u > 0}``."""
    g = getattr(g, "values", g)
    u = np.asarray(u0, dtype=float).copy()
    if (u < 0).any():
        raise ValueError("initial data must be nonnegative")
    Rg = implicit_heat_solve(g, dt)
    traj = Trajectory()

    def rec(t):
        pos = u > 0
        lam = float(g[pos].mean())
        traj.record(t, u, lam, 1.0 / lam - 1.0, pos, keep_snapshots)

    rec(0.0)
    nsteps = int(round(T / dt))
    for k in range(1, nsteps + 1):
        u, _ = step_obstacle(u, g, dt, Rg)
        if k % record_every == 0 or k == nsteps:
            rec(k * dt)
    return traj


# --------------------------------------------------------------------------
# classical obstacle problem


@dataclass(frozen=True)
class ClassicalSource:
    """Time-dependent source ``f(., t)``; ``fn(t)`` must return an ``(n, n)`` array."""

    fn: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.fn(t), dtype=float)

    @classmethod
    def constant(cls, values) -> "ClassicalSource":
        values = np.asarray(values, dtype=float)
        return cls(lambda t: values)


def step_classical(u, src: ClassicalSource, t: float, p: SolverParams) -> np.ndarray:
    """Projected IMEX step for ``u_t - lap u >= f``, ``u >= 0`` with equality on ``{u > 0}``."""
    new = implicit_heat_solve(u + p.dt * src(t), p.dt)
    np.maximum(new, 0.0, out=new)
    return new


def run_classical(u0, src: ClassicalSource, p: SolverParams, keep_snapshots: bool = True,
                  ) -> Trajectory:
    """Classical problem; supports are ``{u > 0}`` and the ``lambda``/``alpha`` columns are NaN.

    Only ``dt``, ``T`` and ``record_every`` of ``p`` are used; the problem
    carries no regularization, so ``eps`` and ``L0`` play no role.
    """
    u = np.asarray(u0, dtype=float).copy()
    if (u < 0).any():
        raise ValueError("initial data must be nonnegative")
    traj = Trajectory()
    traj.record(0.0, u, math.nan, math.nan, u > 0, keep_snapshots)
    for k in range(1, p.nsteps + 1):
        u = step_classical(u, src, (k - 1) * p.dt, p)
        if k % p.record_every == 0 or k == p.nsteps:
            traj.record(k * p.dt, u, math.nan, math.nan, u > 0, keep_snapshots)
    return traj
