from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlobstacle import torus
from nlobstacle.errors import EmptyMask, NegativeTime
from nlobstacle.torus import (
    TorusGrid, area, boundary_annulus_area, dilate, distance_to, erode, excess, hausdorff,
    heat_semigroup, implicit_heat_solve, integrate, laplacian, laplacian_symbol, mean_over,
    superlevel_erosion_radii,
)
from oracles import brute_distance, fields, masks


def cosine_mode(n):
    x, _ = TorusGrid(n).coords()
    return np.cos(2 * np.pi * x)


def mode_eigenvalue(n):
    h = 1.0 / n
    return (2.0 / h**2) * (1.0 - np.cos(2 * np.pi * h))


# ---------------------------------------------------------------- grid


class TestGrid:
    def test_spacing_is_exact(self):
        for n in (8, 12, 128, 1000):
            g = TorusGrid(n)
            assert g.spacing * n == 1
            assert g.spacing == Fraction(1, n)
            assert g.h == 1.0 / n

    @pytest.mark.parametrize("n", [0, 7, -8, 8.5])
    def test_rejects_small_or_fractional(self, n):
        with pytest.raises(ValueError):
            TorusGrid(n)

    def test_of_rejects_non_square(self):
        with pytest.raises(ValueError):
            TorusGrid.of(np.zeros((8, 9)))

    def test_disk_is_periodic(self):
        g = TorusGrid(16)
        d = g.disk((0.0, 0.0), 1.5 / 16)
        assert d[0, 0] and d[15, 0] and d[0, 15] and d[15, 15]
        assert d.sum() == 9


# ---------------------------------------------------------------- integration


class TestIntegration:
    def test_constants(self):
        g = TorusGrid(16)
        assert integrate(g.full(1.0)) == 1.0
        assert integrate(g.zeros()) == 0.0

    def test_scaled_indicator(self):
        n, k, c = 16, 7, 2.5
        f = np.zeros((n, n))
        f.flat[:k] = c
        assert integrate(f) == pytest.approx(c * k / n**2, rel=1e-15)

    @given(fields(), fields(), st.floats(-3, 3))
    def test_linear(self, f, g, c):
        assert integrate(c * f + g) == pytest.approx(c * integrate(f) + integrate(g), abs=1e-12)

    @given(masks(), st.floats(-5, 5))
    def test_mean_of_constant(self, m, c):
        assert mean_over(np.full(m.shape, c), m) == pytest.approx(c, abs=1e-14)

    def test_mean_two_valued_halves(self):
        f = np.full((16, 16), 0.2)
        f[:8] = 0.8
        assert mean_over(f, np.ones_like(f, bool)) == pytest.approx(0.5, abs=1e-15)

    def test_mean_full_set_is_integral(self, rng):
        g = rng.uniform(0.1, 0.9, (16, 16))
        assert mean_over(g, np.ones_like(g, bool)) == pytest.approx(integrate(g), abs=1e-15)

    def test_mean_empty_raises(self):
        with pytest.raises(EmptyMask):
            mean_over(np.ones((8, 8)), np.zeros((8, 8), bool))

    @given(masks(nonempty=False))
    def test_area_in_unit_interval(self, m):
        a = area(m)
        assert 0.0 <= a <= 1.0
        assert a == m.sum() / m.size


# ---------------------------------------------------------------- diffusion


class TestLaplacian:
    def test_constant_is_harmonic(self):
        assert np.array_equal(laplacian(np.full((16, 16), 3.0)), np.zeros((16, 16)))

    @pytest.mark.parametrize("n", [8, 32, 100])
    def test_cosine_eigenfunction(self, n):
        f = cosine_mode(n)
        np.testing.assert_allclose(laplacian(f), -mode_eigenvalue(n) * f, atol=1e-9 * n * n)

    @given(fields())
    def test_integrates_to_zero(self, f):
        assert abs(integrate(laplacian(f))) < 1e-12

    def test_symbol_matches_stencil(self, rng):
        f = rng.standard_normal((12, 12))
        mu = laplacian_symbol(12)
        via_fft = np.fft.irfft2(-mu * np.fft.rfft2(f), s=(12, 12))
        np.testing.assert_allclose(via_fft, laplacian(f), atol=1e-9)


class TestHeat:
    def test_zero_time_is_identity(self, rng):
        f = rng.random((16, 16))
        assert np.array_equal(implicit_heat_solve(f, 0.0), f)
        assert np.array_equal(heat_semigroup(f, 0.0), f)

    @pytest.mark.parametrize("solve", [implicit_heat_solve, heat_semigroup])
    def test_constants_fixed(self, solve):
        np.testing.assert_allclose(solve(np.full((16, 16), 0.7), 0.3), 0.7, atol=1e-15)

    def test_implicit_solve_per_mode(self):
        n, tau = 32, 1.0
        f = cosine_mode(n)
        np.testing.assert_allclose(implicit_heat_solve(f, tau),
                                   f / (1 + tau * mode_eigenvalue(n)), atol=1e-15)

    def test_implicit_solve_inverts_operator(self, rng):
        f = rng.standard_normal((16, 16))
        w = implicit_heat_solve(f, 0.01)
        np.testing.assert_allclose(w - 0.01 * laplacian(w), f, atol=1e-12)

    def test_semigroup_per_mode(self):
        n, t = 32, 1e-3
        f = cosine_mode(n)
        np.testing.assert_allclose(heat_semigroup(f, t), np.exp(-t * mode_eigenvalue(n)) * f,
                                   atol=1e-15)

    def test_semigroup_property(self, rng):
        f = rng.random((16, 16))
        np.testing.assert_allclose(heat_semigroup(heat_semigroup(f, 0.01), 0.02),
                                   heat_semigroup(f, 0.03), atol=1e-14)

    @given(fields(lo=0.0, hi=1.0), st.floats(1e-6, 1.0))
    def test_mass_and_max_principle(self, f, t):
        m = integrate(f)
        for solve in (implicit_heat_solve, heat_semigroup):
            w = solve(f, t)
            assert abs(integrate(w) - m) <= 1e-12 * max(abs(m), 1.0)
            assert f.min() - 1e-12 <= w.min() and w.max() <= f.max() + 1e-12

    def test_mass_at_documented_time(self, rng):
        f = rng.random((16, 16))
        assert abs(integrate(heat_semigroup(f, 0.37)) - integrate(f)) < 1e-12

    @pytest.mark.parametrize("solve", [implicit_heat_solve, heat_semigroup])
    def test_negative_time(self, solve):
        with pytest.raises(NegativeTime):
            solve(np.ones((8, 8)), -1e-9)


# ---------------------------------------------------------------- distances


class TestDistance:
    def test_full_set(self):
        assert np.array_equal(distance_to(np.ones((8, 8), bool)), np.zeros((8, 8)))

    def test_single_cell(self):
        a = np.zeros((8, 8), bool)
        a[0, 0] = True
        d = distance_to(a)
        assert d[4, 0] == 0.5
        assert d[7, 0] == pytest.approx(1 / 8, abs=1e-15)

    def test_empty_raises(self):
        with pytest.raises(EmptyMask):
            distance_to(np.zeros((8, 8), bool))

    @given(masks(n=10))
    def test_matches_all_pairs(self, a):
        np.testing.assert_allclose(distance_to(a), brute_distance(a), atol=1e-14)

    @given(masks(n=10))
    def test_zero_exactly_on_set(self, a):
        d = distance_to(a)
        assert np.array_equal(d == 0, a)

    @given(masks(n=10), st.integers(0, 9), st.integers(0, 9))
    def test_one_lipschitz(self, a, i, j):
        d = distance_to(a)
        h = 1 / 10
        # neighbours differ by at most one cell
        assert abs(d[i, j] - d[(i + 1) % 10, j]) <= h + 1e-14
        assert abs(d[i, j] - d[i, (j + 1) % 10]) <= h + 1e-14


class TestDeltaSets:
    def test_zero_radius(self, rng):
        a = rng.random((16, 16)) < 0.3
        assert np.array_equal(dilate(a, 0.0), a)
        assert np.array_equal(erode(a, 0.0), a)
        assert np.array_equal(erode(a, 1e-12), a)
        assert np.array_equal(erode(a, 0.99 / 16), a)

    def test_plus_shape_with_diagonals(self):
        a = np.zeros((16, 16), bool)
        a[5, 5] = True
        d = dilate(a, 1.5 / 16)
        assert d.sum() == 9
        assert d[4:7, 4:7].all()

    def test_erode_full_torus(self):
        full = np.ones((8, 8), bool)
        assert erode(full, 0.3).all()

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            dilate(np.ones((8, 8), bool), -0.1)

    @given(masks(), masks())
    def test_dilate_monotone_in_set(self, a, b):
        h = 1 / 16
        for delta in (h, 2.5 * h):
            assert (dilate(a, delta) <= dilate(a | b, delta)).all()

    @given(masks(proper=True))
    def test_monotone_in_radius(self, a):
        h = 1 / 16
        radii = [0.0, h, 1.5 * h, 2 * h, 5 * h]
        for r1, r2 in zip(radii, radii[1:]):
            assert (dilate(a, r1) <= dilate(a, r2)).all()
            assert (erode(a, r2) <= erode(a, r1)).all()

    @given(masks(proper=True), st.sampled_from([1, 2, 5]))
    def test_complement_inclusions(self, a, k):
        delta = k / 16
        assert (~dilate(a, delta) <= erode(~a, delta)).all()
        assert (~erode(a, delta) <= dilate(~a, delta)).all()

    @given(masks(proper=True), st.sampled_from([1, 2, 5]))
    def test_erosion_is_complement_of_smaller_dilation(self, a, k):
        n, delta = 16, k / 16
        # largest realized squared index distance strictly below (delta*n)^2
        i, j = np.indices((n, n))
        realized = np.unique(np.minimum(i, n - i) ** 2 + np.minimum(j, n - j) ** 2)
        below = realized[realized < (delta * n) ** 2 - 1e-9].max()
        assert np.array_equal(erode(a, delta), ~dilate(~a, np.sqrt(below) / n))

    @given(masks(), masks(), st.sampled_from([1, 2, 5]))
    def test_dilation_distributes_over_union(self, a, c, k):
        delta = k / 16
        assert np.array_equal(dilate(a | c, delta), dilate(a, delta) | dilate(c, delta))

    @given(masks(proper=True), masks(proper=True), st.sampled_from([1, 2, 5]))
    def test_erosion_of_union_sandwich(self, a, c, k):
        delta = k / 16
        if (a | c).all():
            return
        e = erode(a | c, delta)
        inner = erode(a, delta) | erode(c, delta)
        ring = dilate(a, delta) & ~erode(a, delta)
        assert (inner <= e).all()
        assert (e <= inner | ring).all()


class TestSuperlevelSandwich:
    @given(fields(lo=-1.0, hi=1.0))
    def test_both_inclusions(self, f):
        pos = f > 0
        if not pos.any() or pos.all():
            return
        for r in np.linspace(0.05, 0.95, 10) * f.max():
            if r <= 0:
                continue
            d1, d2 = superlevel_erosion_radii(f, r)
            upper = f >= r
            assert (erode(pos, d1) <= upper).all()
            if upper.any():
                assert (upper <= erode(pos, d2)).all()

    def test_smooth_profile(self):
        x, y = TorusGrid(32).coords()
        f = np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
        d1, d2 = superlevel_erosion_radii(f, 0.5)
        assert 0 < d2 <= d1

    def test_needs_both_signs(self):
        with pytest.raises(EmptyMask):
            superlevel_erosion_radii(np.ones((8, 8)), 0.5)


class TestHausdorff:
    def test_identical(self, rng):
        a = rng.random((16, 16)) < 0.3
        assert hausdorff(a, a) == 0.0

    @pytest.mark.parametrize("k", [1, 3, 8, 13])
    def test_single_cells(self, k):
        n = 16
        a = np.zeros((n, n), bool)
        b = a.copy()
        a[0, 0] = True
        b[k, 0] = True
        assert hausdorff(a, b) == pytest.approx(min(k, n - k) / n, abs=1e-15)

    @given(masks(n=10), masks(n=10))
    def test_symmetric_and_matches_oracle(self, a, b):
        hd = hausdorff(a, b)
        assert hd == hausdorff(b, a)
        oracle = max(brute_distance(b)[a].max(), brute_distance(a)[b].max())
        assert hd == pytest.approx(oracle, abs=1e-14)

    def test_excess_is_one_sided(self):
        a = np.zeros((16, 16), bool)
        a[4:8, 4:8] = True
        b = a.copy()
        b[4:12, 4:8] = True
        assert excess(a, b) == 0.0
        assert excess(b, a) == pytest.approx(4 / 16)

    def test_empty_raises(self):
        with pytest.raises(EmptyMask):
            hausdorff(np.zeros((8, 8), bool), np.ones((8, 8), bool))


class TestAnnulus:
    def stripe(self, n=64):
        a = np.zeros((n, n), bool)
        a[: n // 2] = True
        return a

    @pytest.mark.parametrize("k", range(1, 9))
    def test_stripe_counts(self, k):
        # two interfaces, each covering 2k - 1 rows
        n = 64
        h = 1 / n
        got = boundary_annulus_area(self.stripe(n), k * h)
        assert got == pytest.approx((4 * k - 2) * h, abs=1e-15)
        assert got <= 4.5 * k * h

    def test_zero_radius(self):
        assert boundary_annulus_area(self.stripe(), 0.0) == 0.0

    def test_checkerboard_is_irregular(self):
        n = 64
        i, j = np.indices((n, n))
        a = ((i // 2 + j // 2) % 2) == 0
        assert boundary_annulus_area(a, 2 / n) > 0.5

    @given(masks(proper=True), masks(proper=True))
    def test_union_subadditive(self, a, c):
        if (a | c).all():
            return
        delta = 2 / 16
        lhs = boundary_annulus_area(a | c, delta)
        assert lhs <= boundary_annulus_area(a, delta) + boundary_annulus_area(c, delta) + 1e-15

    @given(masks(proper=True))
    def test_nonnegative_and_monotone(self, a):
        vals = [boundary_annulus_area(a, k / 16) for k in range(0, 5)]
        assert vals[0] >= 0
        assert all(x <= y + 1e-15 for x, y in zip(vals, vals[1:]))

    def test_needs_proper_set(self):
        with pytest.raises(EmptyMask):
            boundary_annulus_area(np.ones((8, 8), bool), 0.1)


def test_module_exports():
    for name in torus.__all__:
        assert hasattr(torus, name)
