import math

import numpy as np
import pytest

from ersim.estimates import (
    EstimateParams, data_moment, energy_estimate_report, fp_gradient_norm, g_lambda,
    refinement_spread, uniqueness_weight, weighted_h2,
)
from ersim.spectral import Grid


def shear(grid, amp=1.0):
    y = grid.coords[1]
    v = np.zeros((2,) + grid.shape)
    v[0] = amp * np.sin(2 * np.pi * y)
    return v


class TestEstimateParams:
    def test_lambda_values(self):
        assert EstimateParams(2, 1.9, 2.2).lam == pytest.approx(2 * 1.1 / 1.8)
        assert EstimateParams(3, 2.5, 2.8).lam == pytest.approx(0.4)

    def test_q_bar_uses_varrho(self):
        e = EstimateParams(3, 3.5, 3.5)
        assert e.q_bar == pytest.approx(3.51)

    def test_window(self):
        assert EstimateParams(2, 1.9, 2.2).p_new_holds
        assert not EstimateParams(3, 1.5, 2.0).p_new_holds

    def test_boundary_is_nan(self):
        # n p- - 3n + 4 = 0 at p- = 1 for n = 2
        e = EstimateParams(2, 1.0, 2.0)
        assert e.denominator == 0 and math.isnan(e.lam) and not e.p_new_holds

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            EstimateParams(2, 2, 2, varrho=0)
        with pytest.raises(ValueError):
            EstimateParams(2, 2, 2, r=0)


class TestGLambda:
    def test_closed_form(self):
        th = np.array([0.0, 1.0, 3.0])
        assert np.allclose(g_lambda(th, 0.5), 2 * np.sqrt(1 + th))

    def test_log_limit(self):
        assert g_lambda(1.0, 1.0) == pytest.approx(math.log(2.0))
        # continuity up to an additive constant
        a = g_lambda(5.0, 1 + 1e-6) - g_lambda(0.0, 1 + 1e-6)
        assert a == pytest.approx(math.log(6.0), rel=1e-5)

    def test_concave_increasing(self):
        th = np.linspace(0, 10, 101)
        g = g_lambda(th, 1.3)
        d = np.diff(g)
        assert np.all(d > 0) and np.all(np.diff(d) < 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            g_lambda(-1.0, 0.5)


class TestWeightedH2:
    def test_case_a_shear(self):
        g = Grid(2, 16)
        v = shear(g)
        times = np.linspace(0, 0.5, 3)
        lam = 0.7
        got = weighted_h2(times, [v] * 3, lam, 2.0, g)
        assert got == pytest.approx(0.5 * 8 * np.pi**4 / (1 + 2 * np.pi**2) ** lam, rel=1e-10)

    def test_case_b_shear(self):
        g = Grid(2, 64)
        v = shear(g)
        pm, lam = 1.9, 1.2
        y = g.coords[1][0]
        lq = lambda f: np.mean(np.abs(f) ** pm) ** (1 / pm)
        d2 = lq(4 * np.pi**2 * np.sin(2 * np.pi * y)) ** 2
        d1 = lq(2 * np.pi * np.cos(2 * np.pi * y))
        want = d2 / ((1 + 2 * np.pi**2) ** lam * (1 + d1) ** (2 - pm))
        assert weighted_h2([0.0, 1.0], [v, v], lam, pm, g) == pytest.approx(want, rel=1e-10)

    def test_undefined_lambda(self):
        g = Grid(2, 8)
        with pytest.raises(ValueError):
            weighted_h2([0, 1], [shear(g)] * 2, math.nan, 2.0, g)


class TestFpGradient:
    def test_newtonian_shear(self):
        g = Grid(2, 16)
        assert fp_gradient_norm([0.0, 2.0], [shear(g)] * 2, 2.0, g) == pytest.approx(8 * np.pi**4, rel=1e-10)

    def test_scales_quadratically_for_p2(self):
        g = Grid(2, 16)
        a = fp_gradient_norm([0, 1], [shear(g)] * 2, 2.0, g)
        b = fp_gradient_norm([0, 1], [shear(g, 3.0)] * 2, 2.0, g)
        assert b == pytest.approx(9 * a)


class TestUniqueness:
    def test_identical_paths(self):
        g = Grid(2, 8)
        v = [shear(g)] * 3
        rep = uniqueness_weight([0, 0.1, 0.2], v, v, 2.5, g)
        assert rep.non_increasing and np.all(rep.functional == 0)

    def test_weight_closed_form(self):
        g = Grid(2, 32)
        v = shear(g)
        pm = 2.5
        d1 = np.mean(np.abs(2 * np.pi * np.cos(2 * np.pi * g.coords[1][0])) ** pm) ** (1 / pm)
        rep = uniqueness_weight([0, 1], [v, v], [0 * v, 0 * v], pm, g, c=2.0)
        assert rep.G[0] == pytest.approx(2 * (d1 ** (2 * pm / (2 * pm - 2)) + 1))
        assert rep.functional[1] == pytest.approx(np.exp(-rep.G[0]) * 0.5)

    def test_growing_difference_detected(self):
        g = Grid(2, 8)
        z = np.zeros((2,) + g.shape)
        v2 = [shear(g, a) for a in (0.1, 1.0, 10.0)]
        rep = uniqueness_weight([0, 0.01, 0.02], [z] * 3, v2, 2.5, g)
        assert not rep.non_increasing and "INCREASING" in str(rep)

    def test_mismatched_noise_rejected(self):
        g = Grid(2, 8)
        v = [shear(g)] * 2
        with pytest.raises(ValueError, match="different noise"):
            uniqueness_weight([0, 1], v, v, 2.5, g, keys=((1, 0), (1, 1)))

    def test_requires_2p_above_n(self):
        g = Grid(3, 8)
        v = np.zeros((2, 3) + g.shape)
        with pytest.raises(ValueError):
            uniqueness_weight([0, 1], v, v, 1.5, g)


class TestEnergyReport:
    def test_moment(self):
        assert data_moment([1.0, 3.0], [2.0, 2.0], 2) == pytest.approx(1 + 5 + 4)
        assert data_moment([1.0], [], 1) == 2.0

    def test_report(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        rep = energy_estimate_report(x, [1.0] * 4, [0.0] * 4, r=2)
        assert rep.lhs == pytest.approx(np.mean(x**2))
        assert rep.lhs_stderr == pytest.approx(np.std(x**2, ddof=1) / 2)
        assert rep.ratio == pytest.approx(rep.lhs / 2.0) and rep.M == 4

    def test_spread(self):
        assert refinement_spread([1.0, 1.5, 1.2]) == 1.5
        assert refinement_spread([0.0, 1.0]) == math.inf
