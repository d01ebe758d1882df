import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlobstacle.errors import BadContainment, NotNondegenerate, SequenceExhausted, UnknownScenario
from nlobstacle.initdata import (
    CONTINUITY_LEVEL, SCENARIOS, BumpSpec, JumpSequenceParams, build_bump, build_jump_sequence,
    build_regularized_initial, collar_radius, preset_scenario, smoothstep,
)
from nlobstacle.solver import michaelis_menten
from nlobstacle.torus import TorusGrid, dilate
from nlobstacle.variational import (
    JUMP, NONDEGENERATE, NONGENERIC, InitialData, capital_lambda, classify, lambda_of,
)
from oracles import masks


@pytest.fixture(scope="module")
def continuity():
    g, d = preset_scenario("continuity", 64)
    theta = classify(g, d).theta
    return g, d, theta, collar_radius(d, g, theta)


@pytest.fixture(scope="module")
def jump_sequence():
    g, d = preset_scenario("jump", 128)
    return g, d, build_jump_sequence(d, g, JumpSequenceParams.default(g, nmax=8))


class TestSmoothstep:
    @pytest.mark.parametrize("order", [0, 1, 2, 3])
    def test_endpoints_and_range(self, order):
        t = np.linspace(-0.5, 1.5, 201)
        s = smoothstep(t, order)
        assert s[0] == 0 and s[-1] == 1
        assert (s >= 0).all() and (s <= 1).all()
        assert (np.diff(s) >= -1e-15).all()
        assert (smoothstep(np.linspace(1e-3, 1, 50), order) > 0).all()

    def test_cubic(self):
        t = np.linspace(0, 1, 11)
        np.testing.assert_allclose(smoothstep(t, 1), 3 * t**2 - 2 * t**3, atol=1e-15)


class TestBump:
    def test_disks(self):
        grid = TorusGrid(64)
        c = (0.5, 0.5)
        z = build_bump(BumpSpec(grid.disk(c, 0.1), grid.disk(c, 0.2)))
        assert z[32, 32] == 1.0
        x, y = grid.coords()
        far = (x - 0.5) ** 2 + (y - 0.5) ** 2 > 0.2**2 + 1e-12
        assert (z[far] == 0).all()

    def test_equal_sets_rejected(self):
        a = TorusGrid(16).disk((0.5, 0.5), 0.2)
        with pytest.raises(BadContainment):
            build_bump(BumpSpec(a, a))

    @given(masks(n=16, nonempty=False), st.integers(1, 3), st.integers(1, 3))
    def test_four_properties(self, inner, k, order):
        outer = dilate(inner, k / 16) if inner.any() else np.zeros((16, 16), bool)
        if not outer.any():
            outer[3, 3] = True
        z = build_bump(BumpSpec(inner, outer, order))
        assert (z[inner] == 1).all()
        assert (z[outer] > 0).all()
        assert (z[~outer] == 0).all()
        assert z.min() >= 0 and z.max() <= 1


class TestRegularizedInitial:
    @pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
    def test_hat_bounds(self, continuity, eps):
        g, d, theta, sigma = continuity
        r = build_regularized_initial(d, g, eps, theta, sigma)
        gv, K = g.values, r.collar
        upper = eps * (2 * (1 - gv) - theta) / theta
        lower = eps * (1 - gv.max()) * gv / gv.max()
        assert (r.hat[K] <= upper[K] * (1 + 1e-12)).all()
        assert (r.hat[K] >= lower[K] * (1 - 1e-12)).all()
        gmin = g.g0
        assert np.abs(r.field - d.u0).max() <= eps * (2 * (1 - gmin) - theta) / theta

    def test_equilibrium_identity(self, continuity):
        g, d, theta, sigma = continuity
        eps = 1e-3
        r = build_regularized_initial(d, g, eps, theta, sigma)
        K, gv = r.collar, g.values
        resid = -michaelis_menten(r.hat, eps) * (1 - gv) + d.alpha0 * gv
        assert np.abs(resid[K]).max() < 1e-12

    def test_lift_structure(self, continuity):
        g, d, theta, sigma = continuity
        eps = 1e-3
        r = build_regularized_initial(d, g, eps, theta, sigma)
        zero = ~d.support
        assert (r.field >= d.u0).all()
        np.testing.assert_array_equal(r.field[zero], r.hat[zero])
        assert r.field[zero].max() <= r.m * eps * (1 + 1e-12)
        assert (r.field[~r.collar] == d.u0[~r.collar]).all()

    def test_constant_half_is_degenerate(self):
        g = np.full((16, 16), 0.5)
        u0 = np.zeros((16, 16))
        u0[:4, :4] = 1
        d = InitialData.from_field(u0, g)
        assert d.alpha0 == pytest.approx(1.0)
        with pytest.raises(NotNondegenerate):
            build_regularized_initial(d, g, 1e-3, 0.0, 1 / 16)

    def test_wide_collar_rejected(self, continuity):
        g, d, theta, _ = continuity
        with pytest.raises(NotNondegenerate):
            build_regularized_initial(d, g, 1e-3, theta, 0.3)

    def test_collar_radius_is_widest(self, continuity):
        g, d, theta, sigma = continuity
        h = 1 / 64
        assert sigma >= h
        gap = (1 - g.values) - d.alpha0 * g.values
        assert gap[dilate(~d.support, sigma)].min() >= theta / 2
        if sigma < 4 * h:
            assert gap[dilate(~d.support, sigma + h)].min() < theta / 2


class TestJumpSequence:
    def test_items_one_to_four(self, jump_sequence):
        g, d, seq = jump_sequence
        gv, u0 = g.values, d.u0
        prev = None
        for un, gam in zip(seq.fields, seq.gammas):
            assert (un >= u0).all()
            if prev is not None:
                assert (un <= prev).all()
                assert ((un > 0) <= (prev > 0)).all()
            assert (un[gv >= seq.Lambda - gam] > 0).all()
            assert (un[(gv <= seq.Lambda - 2 * gam) & (u0 == 0)] == 0).all()
            prev = un

    def test_amplitudes(self, jump_sequence):
        g, d, seq = jump_sequence
        p = JumpSequenceParams.default(g, nmax=8)
        for n, (un, gam) in enumerate(zip(seq.fields, seq.gammas), start=1):
            assert np.abs(un - d.u0).max() == pytest.approx(gam, rel=1e-12)
            assert gam <= p.gamma0 * p.ratio**n * (1 + 1e-15)
            assert 2 * p.gamma(n + 1) < gam

    def test_levels_in_window(self, jump_sequence):
        _, _, seq = jump_sequence
        for r, gam in zip(seq.levels, seq.gammas):
            assert seq.Lambda - 2 * gam <= r < seq.Lambda - gam

    def test_multiplier_gap_settles(self, jump_sequence):
        g, _, seq = jump_sequence
        assert seq.n_dagger is not None and seq.n_dagger <= 8
        for n in range(seq.n_dagger, 9):
            lam = lambda_of(g, seq.fields[n - 1] > 0)
            assert abs(lam - seq.Lambda) < seq.gammas[n - 1] / 4

    def test_excess_area_shrinks(self, jump_sequence):
        _, _, seq = jump_sequence
        ex = seq.excess_areas
        assert all(a >= b for a, b in zip(ex, ex[1:]))
        assert ex[-1] < 0.02

    @pytest.mark.parametrize("k", [4, 8])
    def test_supports_enter_dilated_jump_set(self, jump_sequence, k):
        _, _, seq = jump_sequence
        assert ((seq.fields[-1] > 0) <= dilate(seq.jump_set, k / 128)).all()

    def test_exhausted_when_levels_must_be_realized(self):
        g = np.full((16, 16), 0.2)
        g[:8, :8] = 0.8
        u0 = np.zeros((16, 16))
        u0[8:, 8:] = 1.0
        d = InitialData.from_field(u0, g)
        with pytest.raises(SequenceExhausted):
            build_jump_sequence(d, g, JumpSequenceParams(0.05), require_realized=True)

    @pytest.mark.parametrize("ratio", [0.0, 0.5, 0.7])
    def test_ratio_bounds(self, ratio):
        with pytest.raises(ValueError):
            JumpSequenceParams(0.1, ratio=ratio)


class TestPresets:
    @pytest.mark.parametrize("name,tag", [
        ("continuity", NONDEGENERATE), ("jump", JUMP), ("nongeneric", NONGENERIC),
    ])
    @pytest.mark.parametrize("n", [32, 128])
    def test_regimes(self, name, tag, n):
        g, d = preset_scenario(name, n)
        assert classify(g, d).tag == tag

    def test_coefficient_range(self):
        g, _ = preset_scenario("continuity", 64)
        assert 0.3 - 1e-12 <= g.values.min() and g.values.max() <= 0.7 + 1e-12
        assert g.g0 == pytest.approx(0.3) and g.g1 == pytest.approx(0.7)

    def test_continuity_support_is_superlevel(self):
        g, d = preset_scenario("continuity", 64)
        assert np.array_equal(d.support, g.values > CONTINUITY_LEVEL)

    def test_jump_gap(self):
        g, d = preset_scenario("jump", 128)
        assert capital_lambda(g, d.support) - d.lambda0 > 0.02

    def test_classical_preset_exists(self):
        g, d = preset_scenario("classical", 64)
        assert d.support.any()

    def test_unknown(self):
        with pytest.raises(UnknownScenario):
            preset_scenario("spiral")
        assert "spiral" not in SCENARIOS
