"""Fast randomized property checks over every module.

Used by ``nlobstacle selftest``; independent of the test suite so that an
installed copy can verify itself.  Every check returns ``(name, ok, detail)``.
"""
from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from . import torus
from .fieldio import read_field, write_field
from .initdata import JumpSequenceParams, build_jump_sequence, preset_scenario
from .solver import SolverParams, run_regularized
from .torus import TorusGrid
from .variational import JUMP, NONDEGENERATE, NONGENERIC, capital_lambda, classify, maximizer_set

__all__ = ["run_selfcheck", "CHECKS"]


def _random_mask(rng, n, p=None):
    p = rng.uniform(0.1, 0.6) if p is None else p
    m = rng.random((n, n)) < p
    if not m.any():
        m[0, 0] = True
    if m.all():
        m[0, 0] = False
    return m


def _brute_lambda(g, S):
    best = g[S].mean()
    for v in np.unique(g):
        best = max(best, g[S | (g >= v)].mean())
    return best


def check_laplacian(rng):
    f = rng.standard_normal((16, 16))
    s = abs(torus.integrate(torus.laplacian(f)))
    return s < 1e-12, f"|int lap f| = {s:.2e}"


def check_heat_mass(rng):
    f = rng.random((16, 16))
    m = torus.integrate(f)
    a = abs(torus.integrate(torus.implicit_heat_solve(f, 0.37)) - m) / m
    w = torus.heat_semigroup(f, 0.37)
    b = abs(torus.integrate(w) - m) / m
    mp = f.min() - 1e-12 <= w.min() and w.max() <= f.max() + 1e-12
    return a < 1e-12 and b < 1e-12 and mp, f"drift {a:.1e}/{b:.1e}, max principle {mp}"


def check_distance(rng):
    n = 8
    A = _random_mask(rng, n, 0.15)
    d = torus.distance_to(A)
    idx = np.argwhere(A)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            dx = np.abs(idx[:, 0] - i)
            dy = np.abs(idx[:, 1] - j)
            dx = np.minimum(dx, n - dx)
            dy = np.minimum(dy, n - dy)
            worst = max(worst, abs(np.sqrt(dx * dx + dy * dy).min() / n - d[i, j]))
    return worst < 1e-12, f"max deviation from all-pairs {worst:.1e}"


def check_delta_sets(rng):
    n = 16
    h = 1.0 / n
    for _ in range(10):
        A, C = _random_mask(rng, n), _random_mask(rng, n)
        for delta in (h, 2 * h, 5 * h):
            if not ((~torus.dilate(A, delta)) <= torus.erode(~A, delta)).all():
                return False, "complement of dilation not inside erosion"
            if not ((~torus.erode(A, delta)) <= torus.dilate(~A, delta)).all():
                return False, "complement of erosion not inside dilation"
            if not np.array_equal(torus.dilate(A | C, delta),
                                  torus.dilate(A, delta) | torus.dilate(C, delta)):
                return False, "dilation does not distribute over unions"
            eAC = torus.erode(A | C, delta)
            inner = torus.erode(A, delta) | torus.erode(C, delta)
            ring = torus.dilate(A, delta) & ~torus.erode(A, delta)
            if not ((inner <= eAC).all() and (eAC <= inner | ring).all()):
                return False, "erosion union sandwich broken"
    return True, "30 random pairs"


def check_lambda_oracle(rng):
    n = 16
    worst = 0.0
    for _ in range(10):
        g = rng.uniform(0.2, 0.8, (n, n))
        S = _random_mask(rng, n, 0.2)
        L = capital_lambda(g, S)
        worst = max(worst, abs(L - _brute_lambda(g, S)))
        A = maximizer_set(g, S, L)
        worst = max(worst, abs(g[A].mean() - L))
    return worst <= 1e-9, f"max |bisection - scan| = {worst:.1e}"


def check_presets(rng):
    tags = {name: classify(*preset_scenario(name, 32)).tag
            for name in ("continuity", "jump", "nongeneric")}
    want = {"continuity": NONDEGENERATE, "jump": JUMP, "nongeneric": NONGENERIC}
    return tags == want, str(tags)


def check_sequence(rng):
    g, data = preset_scenario("jump", 32)
    seq = build_jump_sequence(data, g, JumpSequenceParams.default(g, nmax=4))
    return seq.n_dagger is not None, f"n_dagger = {seq.n_dagger}"


def check_mass(rng):
    n = 16
    g = rng.uniform(0.3, 0.7, (n, n))
    u = rng.random((n, n))
    p = SolverParams(eps=1e-2, dt=1e-3, T=50e-3, record_every=50)
    tr = run_regularized(u, g, p, keep_snapshots=False)
    drift = abs(tr.masses[-1] - tr.masses[0]) / tr.masses[0]
    return drift < 1e-10, f"relative drift {drift:.1e}"


def check_field_io(rng):
    f = rng.standard_normal((8, 8))
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "f.f64"
        write_field(p, f, "probe")
        name, back = read_field(p)
    return name == "probe" and np.array_equal(back, f), "round trip"


def check_grid(rng):
    grid = TorusGrid(8)
    return grid.spacing * grid.n == 1, "h * n == 1 exactly"


CHECKS = {
    "grid": check_grid,
    "laplacian": check_laplacian,
    "heat_mass": check_heat_mass,
    "distance": check_distance,
    "delta_sets": check_delta_sets,
    "lambda_oracle": check_lambda_oracle,
    "presets": check_presets,
    "sequence": check_sequence,
    "mass": check_mass,
    "field_io": check_field_io,
}


def run_selfcheck(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, reported rather than raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
