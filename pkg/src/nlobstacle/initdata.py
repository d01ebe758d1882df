"""Coefficients, initial data and their smoothed variants.

Covers the canonical scenarios, cut-off bumps, the O(eps) collar that makes
the Michaelis-Menten problem start in equilibrium off the support, and the
decreasing sequence ``u_n = u0 + gamma_n * zeta_n`` whose supports shrink onto
the jump set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadContainment, NotNondegenerate, SequenceExhausted, UnknownScenario
from .torus import TorusGrid, area, dilate, distance_to
from .variational import (
    Coefficient,
    InitialData,
    capital_lambda,
    lambda_of,
    maximizer_set,
)

__all__ = [
    "BumpSpec",
    "JumpSequenceParams",
    "JumpSequence",
    "RegularizedInitial",
    "smoothstep",
    "build_bump",
    "build_regularized_initial",
    "collar_radius",
    "build_jump_sequence",
    "preset_scenario",
    "SCENARIOS",
]

SCENARIOS = ("continuity", "jump", "nongeneric", "classical")


def smoothstep(t, order: int = 1) -> np.ndarray:
    """Polynomial smoothstep of the given order on ``[0, 1]``, clamped outside.

    ``order=1`` is ``3t^2 - 2t^3``; the result is ``C^order`` at both ends and
    strictly positive on ``(0, 1]``.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    poly = np.zeros_like(t)
    for k in range(order + 1):
        poly += math.comb(order + k, k) * math.comb(2 * order + 1, order - k) * (-t) ** k
    return t ** (order + 1) * poly


@dataclass(frozen=True)
class BumpSpec:
    inner: np.ndarray
    outer: np.ndarray
    profile: int = 1


def build_bump(spec: BumpSpec) -> np.ndarray:
    """Cut-off ``zeta``: 1 on ``inner``, positive on ``outer``, 0 elsewhere.

    Built from the distances to ``inner`` and to the complement of ``outer``.
    """
    inner = np.asarray(spec.inner, dtype=bool)
    outer = np.asarray(spec.outer, dtype=bool)
    h = TorusGrid.of(outer).h
    if not outer.any():
        raise BadContainment("outer set is empty")
    if inner.any() and not (dilate(inner, h) <= outer).all():
        raise BadContainment("inner set plus one cell is not contained in the outer set")
    if outer.all():
        if not inner.any():
            return np.ones(outer.shape)
        d_in = distance_to(inner)
        ratio = 1.0 - d_in / (d_in.max() + h)
    else:
        d_out = distance_to(~outer)
        if inner.any():
            d_in = distance_to(inner)
            ratio = np.where(outer, d_out / np.maximum(d_out + d_in, h), 0.0)
        else:
            ratio = d_out / d_out.max()
    zeta = smoothstep(ratio, spec.profile)
    zeta[inner] = 1.0
    zeta[~outer] = 0.0
    return zeta


@dataclass(frozen=True)
class RegularizedInitial:
    """Smoothed data ``u0 + hat * zeta`` with its collar ingredients."""

    field: np.ndarray
    hat: np.ndarray
    zeta: np.ndarray
    collar: np.ndarray
    m: float
    eps: float


def build_regularized_initial(
    data: InitialData, g, eps: float, theta: float, sigma: float, profile: int = 1
) -> RegularizedInitial:
    """Lift ``u0`` by the equilibrium profile ``eps*a0*g / ((1-g) - a0*g)`` near ``{u0 = 0}``.

    The lift lives on ``K = dilate({u0 = 0}, sigma)``, which must keep
    ``(1-g) - a0*g >= theta/2``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    gv = g.values if isinstance(g, Coefficient) else np.asarray(g, dtype=float)
    u0 = data.u0
    zero = ~data.support
    if not zero.any():
        z = np.zeros_like(u0)
        return RegularizedInitial(u0.copy(), z, z, zero, 0.0, eps)
    if not theta > 0:
        raise NotNondegenerate(f"theta must be positive, got {theta}")
    a0 = data.alpha0
    gap = (1.0 - gv) - a0 * gv
    collar = dilate(zero, sigma)
    worst = float(gap[collar].min())
    if worst < theta / 2:
        raise NotNondegenerate(
            f"(1-g) - alpha0*g drops to {worst:.3g} < theta/2 = {theta / 2:.3g} within sigma={sigma}"
        )
    hat = np.zeros_like(u0)
    hat[collar] = eps * a0 * gv[collar] / gap[collar]
    zeta = build_bump(BumpSpec(zero, collar, profile))
    field = u0 + hat * zeta
    m = float(field[zero].max()) / eps
    return RegularizedInitial(field, hat, zeta, collar, m, eps)


def collar_radius(data: InitialData, g, theta: float, max_cells: int = 4) -> float:
    """Widest collar ``k*h`` (``1 <= k <= max_cells``) on which ``(1-g) - a0*g >= theta/2``."""
    gv = g.values if isinstance(g, Coefficient) else np.asarray(g, dtype=float)
    zero = ~data.support
    h = TorusGrid.of(gv).h
    if not zero.any():
        return h
    gap = (1.0 - gv) - data.alpha0 * gv
    best = None
    for k in range(1, max_cells + 1):
        if gap[dilate(zero, k * h)].min() < theta / 2:
            break
        best = k * h
    if best is None:
        raise NotNondegenerate("no collar of one cell keeps (1-g) - alpha0*g >= theta/2")
    return best


@dataclass(frozen=True)
class JumpSequenceParams:
    gamma0: float
    ratio: float = 1.0 / 3.0
    nmax: int = 8
    profile: int = 1

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        if not 0 < self.ratio < 0.5:
            raise ValueError("ratio must lie in (0, 1/2) so that 2*gamma_{n+1} < gamma_n")
        if self.nmax < 1:
            raise ValueError("nmax must be >= 1")

    @classmethod
    def default(cls, g: Coefficient, **kw) -> "JumpSequenceParams":
        return cls(gamma0=0.1 * (g.g1 - g.g0), **kw)

    def gamma(self, n: int) -> float:
        return self.gamma0 * self.ratio**n


@dataclass
class JumpSequence:
    """Members ``u_n`` for ``n = 1..nmax`` plus the diagnostics of their construction."""

    fields: list
    gammas: list
    levels: list
    Lambda: float
    jump_set: np.ndarray
    lambdas: list = field(default_factory=list)
    excess_areas: list = field(default_factory=list)
    realized_levels: list = field(default_factory=list)
    n_dagger: int | None = None

    @property
    def indices(self) -> list:
        return list(range(1, len(self.fields) + 1))

    def lambda_gaps(self) -> list:
        return [abs(lam - self.Lambda) for lam in self.lambdas]


def _pick_level(gv, lo, hi, require_realized):
    """Distinct value of ``g`` in ``[lo, hi)`` nearest the midpoint."""
    mid = 0.5 * (lo + hi)
    vals = gv[(gv >= lo) & (gv < hi)]
    if vals.size:
        return float(vals[np.argmin(np.abs(vals - mid))]), True
    if require_realized:
        raise SequenceExhausted(f"no grid value of g in [{lo:.6g}, {hi:.6g})")
    # no cell sits on this level, so the midpoint is as good as any
    return mid, False


def build_jump_sequence(
    data: InitialData,
    g,
    params: JumpSequenceParams,
    Lambda: float | None = None,
    require_realized: bool = False,
) -> JumpSequence:
    """Decreasing data ``u_n = u0 + gamma_n * zeta_n`` with supports shrinking onto the jump set.

    ``zeta_n`` is 1 on ``{g > r_{n+1}}``, in ``(0, 1]`` on ``{r_n < g <= r_{n+1}}``
    and 0 on ``{g <= r_n}``, where ``r_n`` is taken in
    ``[Lambda - 2 gamma_n, Lambda - gamma_n)``.
    """
    gv = g.values if isinstance(g, Coefficient) else np.asarray(g, dtype=float)
    u0 = data.u0
    if Lambda is None:
        Lambda = capital_lambda(gv, data.support)
    jump_set = maximizer_set(gv, data.support, Lambda)

    gammas = [params.gamma(n) for n in range(1, params.nmax + 2)]
    levels, realized = [], []
    for gam in gammas:
        r, ok = _pick_level(gv, Lambda - 2 * gam, Lambda - gam, require_realized)
        levels.append(r)
        realized.append(ok)

    fields = []
    for i in range(params.nmax):
        r_lo, r_hi = levels[i], levels[i + 1]
        zeta = smoothstep((gv - r_lo) / (r_hi - r_lo), params.profile)
        zeta[gv <= r_lo] = 0.0
        zeta[gv > r_hi] = 1.0
        fields.append(u0 + gammas[i] * zeta)

    seq = JumpSequence(
        fields=fields,
        gammas=gammas[: params.nmax],
        levels=levels[: params.nmax],
        Lambda=Lambda,
        jump_set=jump_set,
        realized_levels=realized[: params.nmax],
    )
    _check_sequence(seq, u0, gv)
    for un in fields:
        pos = un > 0
        seq.lambdas.append(lambda_of(gv, pos))
        seq.excess_areas.append(area(pos & ~jump_set))
    seq.n_dagger = _first_index_from_which(
        [gap < gam / 4 for gap, gam in zip(seq.lambda_gaps(), seq.gammas)]
    )
    return seq


def _first_index_from_which(flags) -> int | None:
    """Smallest 1-based ``n`` such that ``flags[m-1]`` holds for all ``m >= n``."""
    n = None
    for i in range(len(flags) - 1, -1, -1):
        if not flags[i]:
            break
        n = i + 1
    return n


def _check_sequence(seq: JumpSequence, u0, gv) -> None:
    zero = u0 == 0
    prev = None
    for un, gam in zip(seq.fields, seq.gammas):
        if not (un >= u0).all():
            raise AssertionError("u_n >= u0 violated")
        if prev is not None:
            if not (un <= prev).all():
                raise AssertionError("u_{n+1} <= u_n violated")
            if not ((un > 0) <= (prev > 0)).all():
                raise AssertionError("support nesting violated")
        if not (un[gv >= seq.Lambda - gam] > 0).all():
            raise AssertionError("u_n > 0 on {g >= Lambda - gamma_n} violated")
        if (un[(gv <= seq.Lambda - 2 * gam) & zero] != 0).any():
            raise AssertionError("u_n = 0 on {g <= Lambda - 2 gamma_n} & {u0 = 0} violated")
        if np.abs(un - u0).max() > gam:
            raise AssertionError("|u_n - u0| <= gamma_n violated")
        prev = un


# --------------------------------------------------------------------------
# scenarios


def sinusoid_coefficient(grid: TorusGrid, mean: float = 0.5, amp: float = 0.2) -> Coefficient:
    x, y = grid.coords()
    values = mean + amp * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    return Coefficient(values, mean - amp, mean + amp)


def radial_bump(grid: TorusGrid, center, radius: float, height: float = 1.0, power: int = 3):
    """``height * (1 - r^2/radius^2)_+^power`` around ``center`` (periodic)."""
    x, y = grid.coords()
    dx = x - center[0]
    dy = y - center[1]
    dx -= np.round(dx)
    dy -= np.round(dy)
    s = 1.0 - (dx * dx + dy * dy) / radius**2
    return height * np.clip(s, 0.0, None) ** power


def preset_scenario(name: str, n: int = 128, **overrides) -> tuple[Coefficient, InitialData]:
    """Canonical ``(g, data)`` pairs used by the experiments.

    ``g = 0.5 + 0.2 sin(2 pi x) sin(2 pi y)`` except for ``nongeneric``,
    where ``g = 0.5``.
    """
    grid = TorusGrid(n)
    if name == "continuity":
        g = sinusoid_coefficient(grid)
        c = overrides.get("level", CONTINUITY_LEVEL)
        height = overrides.get("height", CONTINUITY_HEIGHT)
        power = overrides.get("power", CONTINUITY_POWER)
        u0 = height * np.clip(g.values - c, 0.0, None) ** power
    elif name == "jump":
        g = sinusoid_coefficient(grid)
        center = np.unravel_index(np.argmin(g.values), g.values.shape)
        center = (center[0] * grid.h, center[1] * grid.h)
        u0 = radial_bump(grid, center, overrides.get("radius", JUMP_RADIUS),
                         overrides.get("height", JUMP_HEIGHT))
    elif name == "nongeneric":
        g = Coefficient(grid.full(0.5), 0.5, 0.5)
        u0 = radial_bump(grid, (0.5, 0.5), overrides.get("radius", JUMP_RADIUS),
                         overrides.get("height", JUMP_HEIGHT))
    elif name == "classical":
        g = sinusoid_coefficient(grid)
        u0 = radial_bump(grid, (0.25, 0.25), overrides.get("radius", CLASSICAL_RADIUS),
                         overrides.get("height", CLASSICAL_HEIGHT), power=2)
    else:
        raise UnknownScenario(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
    return g, InitialData.from_field(u0, g)


CONTINUITY_LEVEL = 0.55
CONTINUITY_HEIGHT = 100.0
CONTINUITY_POWER = 2
JUMP_RADIUS = 0.25
JUMP_HEIGHT = 0.5
CLASSICAL_RADIUS = 0.15
CLASSICAL_HEIGHT = 1.0
