"""Periodic grid geometry on the flat unit 2-torus.

Fields are ``(n, n)`` float arrays indexed ``[ix, iy]``; cell ``(ix, iy)`` has
its center at ``(ix * h, iy * h)`` with ``h = 1 / n``.  Sets are boolean arrays
of the same shape and are read as unions of closed cells.  Every cell carries
the quadrature weight ``h**2``, so the torus has unit area.

Distances are periodic Euclidean distances between cell centers.  Internally
they are handled as integer squared index distances, which keeps the ``<=`` /
``>=`` conventions of the dilation and erosion exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import fft, ndimage

from .errors import EmptyMask, NegativeTime

__all__ = [
    "TorusGrid",
    "integrate",
    "area",
    "mean_over",
    "laplacian",
    "laplacian_symbol",
    "implicit_heat_solve",
    "heat_semigroup",
    "distance_to",
    "dilate",
    "erode",
    "hausdorff",
    "excess",
    "boundary_annulus_area",
    "superlevel_erosion_radii",
]

# slack when comparing a squared index distance against (delta / h)**2
_SQ_TOL = 1e-9


@dataclass(frozen=True)
class TorusGrid:
    """``n x n`` cell-centered discretization of the unit torus."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"grid needs an integer n >= 8, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def spacing(self) -> Fraction:
        """Exact grid spacing ``1/n``."""
        return Fraction(1, self.n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @classmethod
    def of(cls, arr) -> "TorusGrid":
        arr = np.asarray(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square 2-d array, got shape {arr.shape}")
        return cls(arr.shape[0])

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates ``(x, y)`` as two ``(n, n)`` arrays."""
        s = np.arange(self.n) * self.h
        return np.meshgrid(s, s, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def empty_mask(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=bool)

    def disk(self, center, radius: float) -> np.ndarray:
        """Cells whose center lies within periodic distance ``radius`` of ``center``."""
        x, y = self.coords()
        dx = _wrap(x - center[0])
        dy = _wrap(y - center[1])
        return dx**2 + dy**2 <= radius**2 + 1e-14


def _wrap(d):
    return d - np.round(d)


# --------------------------------------------------------------------------
# integration


def integrate(f) -> float:
    """Quadrature ``h**2 * sum(f)``."""
    f = np.asarray(f, dtype=float)
    return float(f.sum()) / f.size


def area(mask) -> float:
    mask = np.asarray(mask, dtype=bool)
    return np.count_nonzero(mask) / mask.size


def mean_over(f, mask) -> float:
    """Average of ``f`` over the set ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    count = np.count_nonzero(mask)
    if count == 0:
        raise EmptyMask("mean over an empty set")
    return float(np.asarray(f, dtype=float)[mask].sum()) / count


# --------------------------------------------------------------------------
# diffusion


def laplacian(f) -> np.ndarray:
    """Five-point periodic Laplacian."""
    f = np.asarray(f, dtype=float)
    n = TorusGrid.of(f).n
    out = (
        np.roll(f, 1, 0) + np.roll(f, -1, 0) + np.roll(f, 1, 1) + np.roll(f, -1, 1) - 4.0 * f
    )
    return out * (n * n)


_symbol_cache: dict[int, np.ndarray] = {}


def laplacian_symbol(n: int) -> np.ndarray:
    """Eigenvalues ``mu >= 0`` of ``-laplacian`` on the ``rfft2`` frequency layout.

    ``mu = (2/h**2) * (2 - cos(2 pi kx h) - cos(2 pi ky h))``.
    """
    mu = _symbol_cache.get(n)
    if mu is None:
        kx = np.arange(n)[:, None]
        ky = np.arange(n // 2 + 1)[None, :]
        mu = 2.0 * n * n * (2.0 - np.cos(2 * np.pi * kx / n) - np.cos(2 * np.pi * ky / n))
        mu.setflags(write=False)
        _symbol_cache[n] = mu
    return mu


def _spectral_apply(f, multiplier) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    return fft.irfft2(fft.rfft2(f) * multiplier, s=(n, n))


def implicit_heat_solve(f, tau: float) -> np.ndarray:
    """Solve ``(I - tau * laplacian) w = f`` exactly in the discrete Fourier basis."""
    if tau < 0:
        raise NegativeTime(f"tau must be >= 0, got {tau}")
    f = np.asarray(f, dtype=float)
    if tau == 0:
        return f.copy()
    mu = laplacian_symbol(TorusGrid.of(f).n)
    return _spectral_apply(f, 1.0 / (1.0 + tau * mu))


def heat_semigroup(f, t: float) -> np.ndarray:
    """``exp(t * laplacian) f`` by per-mode damping ``exp(-t * mu)``."""
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    f = np.asarray(f, dtype=float)
    if t == 0:
        return f.copy()
    mu = laplacian_symbol(TorusGrid.of(f).n)
    return _spectral_apply(f, np.exp(-t * mu))


# --------------------------------------------------------------------------
# distances and delta-sets


def _sqdist_index(mask) -> np.ndarray:
    """Integer squared periodic index distance from every cell to ``mask``.

    The nearest periodic image of any cell lies within ``n // 2`` cells along
    each axis, so a wrap-padding of that width holds every image the center
    block needs; scipy's transform is exact Euclidean.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("distance to an empty set")
    n = mask.shape[0]
    pad = n // 2
    padded = np.pad(~mask, pad, mode="wrap")
    d = ndimage.distance_transform_edt(padded)[pad : pad + n, pad : pad + n]
    return np.rint(d * d).astype(np.int64)


def distance_to(mask) -> np.ndarray:
    """Periodic distance from each cell center to the nearest cell of ``mask``."""
    n = TorusGrid.of(mask).n
    return np.sqrt(_sqdist_index(mask)) / n


def _radius_sq(delta: float, n: int) -> float:
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    return (delta * n) ** 2 + _SQ_TOL


def dilate(mask, delta: float) -> np.ndarray:
    """Outer set ``{d(., A) <= delta}``."""
    n = TorusGrid.of(mask).n
    return _sqdist_index(mask) <= _radius_sq(delta, n)


def erode(mask, delta: float) -> np.ndarray:
    """Inner set ``{d(., A^c) >= delta}``; the whole torus if ``A^c`` is empty.

    At ``delta = 0`` this returns ``A`` (the limit from positive radii), so
    that dilation and erosion agree with ``A`` at zero radius.
    """
    mask = np.asarray(mask, dtype=bool)
    n = TorusGrid.of(mask).n
    r2 = _radius_sq(delta, n)
    if mask.all():
        return np.ones_like(mask)
    # smallest admissible integer squared distance; A^c itself is always excluded,
    # so delta = 0 gives the limit delta -> 0+, which is A
    k = max(math.ceil(r2 - 2 * _SQ_TOL), 1)
    return _sqdist_index(~mask) >= k


def excess(a, b) -> float:
    """One-sided Hausdorff excess ``sup_{x in a} d(x, b)``; zero for empty ``a``."""
    a = np.asarray(a, dtype=bool)
    if not a.any():
        return 0.0
    return float(distance_to(b)[a].max())


def hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if not a.any() or not b.any():
        raise EmptyMask("Hausdorff distance needs two nonempty sets")
    return max(excess(a, b), excess(b, a))


def boundary_annulus_area(mask, delta: float) -> float:
    """``|A_{+delta}| - |A_{-delta}|``; tends to zero iff ``A`` is regular."""
    mask = np.asarray(mask, dtype=bool)
    if mask.all() or not mask.any():
        raise EmptyMask("annulus needs A and its complement nonempty")
    return area(dilate(mask, delta)) - area(erode(mask, delta))


def superlevel_erosion_radii(f, r: float) -> tuple[float, float]:
    """Radii ``(delta1, delta2)`` with ``erode({f>0}, delta1) <= {f>=r} <= erode({f>0}, delta2)``.

    ``delta2`` is the distance between ``{f >= r}`` and ``{f <= 0}``.
    ``delta1`` is the smallest realized distance ``delta`` such that ``f >= r``
    everywhere at distance ``>= delta`` from ``{f <= 0}``.
    """
    f = np.asarray(f, dtype=float)
    n = TorusGrid.of(f).n
    nonpos = f <= 0
    if not nonpos.any() or nonpos.all():
        raise EmptyMask("need both {f > 0} and {f <= 0} nonempty")
    if r <= 0:
        raise ValueError("r must be positive")
    sq = _sqdist_index(nonpos)
    upper = f >= r
    delta2 = float(np.sqrt(sq[upper].min())) / n if upper.any() else np.inf

    # m(k) = min f over {sq >= k}; delta1 is the first realized k with m(k) >= r
    levels = np.unique(sq[sq > 0])
    order = np.argsort(sq, axis=None)[::-1]
    sq_sorted = sq.ravel()[order]
    running_min = np.minimum.accumulate(f.ravel()[order])
    # running_min[j] = min f over the j+1 cells with the largest sq
    idx = np.searchsorted(-sq_sorted, -levels, side="right") - 1
    m_of_level = running_min[idx]
    ok = levels[m_of_level >= r]
    if ok.size:
        delta1 = float(np.sqrt(ok.min())) / n
    else:
        delta1 = (float(np.sqrt(sq.max())) + 1.0) / n
    return delta1, delta2
