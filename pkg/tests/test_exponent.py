import math

import numpy as np
import pytest

from ersim.exponent import (
    ExponentBounds, ExponentField, check_admissibility, constant_exponent, log_holder_modulus,
    sample_exponent,
)
from ersim.spectral import Grid, read_snapshot, write_snapshot


class TestBounds:
    def test_invalid(self):
        with pytest.raises(ValueError):
            ExponentBounds(1.0, 2.0)
        with pytest.raises(ValueError):
            ExponentBounds(2.5, 2.0)

    def test_martingale_3d_newtonian(self):
        rep = check_admissibility(ExponentBounds(2.0, 2.0, n=3), "martingale")
        assert rep.admissible and not rep.violations

    def test_pathwise_3d_fails(self):
        rep = check_admissibility(ExponentBounds(2.0, 2.0, n=3), "pathwise")
        assert not rep.admissible
        assert any("(n+2)/2" in v for v in rep.violations)

    def test_strong_2d(self):
        assert check_admissibility(ExponentBounds(1.5, 3.9, n=2), "strong").admissible
        assert not check_admissibility(ExponentBounds(1.5, 4.0, n=2), "strong").admissible

    def test_strong_3d(self):
        assert check_admissibility(ExponentBounds(2.3, 3.0, n=3), "strong").admissible
        rep = check_admissibility(ExponentBounds(2.3, 3.2, n=3), "strong")
        assert not rep.admissible and "4/5" in rep.violations[0]

    def test_relaxed_window_rescues(self):
        # 2D: (n+2)p-/n = 4 <= p+ but p+ < n p- + 4 = 8
        b = ExponentBounds(2.0, 5.0, n=2)
        assert not b.martingale_window and b.relaxed_window
        assert check_admissibility(b, "martingale").admissible

    def test_unknown_regime(self):
        with pytest.raises(ValueError):
            check_admissibility(ExponentBounds(2, 2), "weak")


class TestSampling:
    def test_constant(self):
        g = Grid(2, 16)
        f = sample_exponent("constant", ExponentBounds(2.0, 2.0), g)
        assert np.all(f.values == 2.0)

    def test_zero_amplitude_midpoint(self):
        g = Grid(2, 16)
        f = sample_exponent("frozen_fourier", ExponentBounds(1.8, 2.4), g, amplitude=0.0)
        assert np.allclose(f.values, 2.1)

    def test_deterministic(self):
        g = Grid(2, 16)
        b = ExponentBounds(1.8, 2.4)
        a = sample_exponent("frozen_fourier", b, g, seed=5)
        c = sample_exponent("frozen_fourier", b, g, seed=5)
        d = sample_exponent("frozen_fourier", b, g, seed=6)
        assert np.array_equal(a.values, c.values)
        assert not np.array_equal(a.values, d.values)

    @pytest.mark.parametrize("model", ["frozen_fourier", "ou_time"])
    def test_sound_with_lipschitz_budget(self, model):
        g = Grid(2, 16)
        b = ExponentBounds(1.6, 2.6, c_p=6.0)
        f = sample_exponent(model, b, g, seed=3, times=np.linspace(0, 1, 11))
        assert f.certify() == []
        assert b.p_minus <= f.p_min and f.p_max <= b.p_plus
        assert f.p_max - f.p_min > 0.05

    def test_ou_time_varies_and_interpolates(self):
        g = Grid(2, 8)
        f = sample_exponent("ou_time", ExponentBounds(1.6, 2.6), g, seed=1,
                            times=np.linspace(0, 1, 5), relaxation=5.0)
        assert f.values.shape == (5, 8, 8)
        assert not np.allclose(f.values[0], f.values[-1])
        mid = f.at(0.125)
        assert np.allclose(mid, 0.5 * (f.values[0] + f.values[1]))
        assert np.array_equal(f.at(-1.0), f.values[0]) and np.array_equal(f.at(9.0), f.values[-1])

    def test_infeasible_budget(self):
        with pytest.raises(ValueError, match="infeasible"):
            sample_exponent("frozen_fourier", ExponentBounds(1.8, 2.4, c_p=2.0), Grid(2, 8))

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            sample_exponent("white", ExponentBounds(2, 3), Grid(2, 8))

    def test_field_shape_checked(self):
        g = Grid(2, 8)
        with pytest.raises(ValueError):
            ExponentField(g, [0.0], np.full((8, 8), 2.0), ExponentBounds(2, 2))

    def test_snapshot_round_trip(self, tmp_path):
        g = Grid(2, 8)
        f = sample_exponent("ou_time", ExponentBounds(1.6, 2.6), g, seed=2, times=[0.0, 0.5, 1.0])
        write_snapshot(tmp_path / "p.ersf", g, f.values, times=f.times)
        snap = read_snapshot(tmp_path / "p.ersf")
        assert np.array_equal(snap.values, f.values) and np.array_equal(snap.times, f.times)


class TestLogHolder:
    def test_constant_zero(self):
        assert log_holder_modulus(constant_exponent(2.5, Grid(2, 8))) == 0.0

    def test_two_point_hand_value(self):
        g = Grid(2, 4)
        vals = np.full((1, 4, 4), 2.0)
        vals[0, 0, 0] = 3.0
        f = ExponentField(g, [0.0], vals, ExponentBounds(2.0, 3.0))
        # the closest distinct pair is one grid step apart
        h = 0.25
        expect = abs(1 / 3 - 1 / 2) * math.log(math.e + 1 / h)
        assert np.isclose(log_holder_modulus(f), expect)

    def test_lipschitz_bound_3d(self):
        g = Grid(3, 8)
        b = ExponentBounds(1.8, 2.4, n=3, c_p=4.0)
        f = sample_exponent("frozen_fourier", b, g, seed=4)
        L = b.c_p  # sup|grad p| <= c_p by construction
        diam = math.sqrt(3) / 2
        bound = L * diam * math.log(math.e + 1 / g.spacing) / b.p_minus**2
        assert log_holder_modulus(f) <= bound
