import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ersim.spectral import (
    Grid, divergence, fft_forward, fft_inverse, gradient, integrate, inner,
    inv_laplacian, l2_norm_sq, laplacian, leray_project, read_snapshot, sym_gradient,
    write_snapshot, TWO_PI,
)

from conftest import random_divfree


def _band_limited(grid, gen, lead=()):
    u = gen.standard_normal(lead + grid.shape)
    return fft_inverse(fft_forward(u, grid) * grid.dealias_mask, grid)


class TestGrid:
    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            Grid(2, 6 + 1)
        with pytest.raises(ValueError):
            Grid(2, 2)
        with pytest.raises(ValueError):
            Grid(4, 16)

    def test_coords_span_unit_torus(self, grid2):
        x = grid2.coords
        assert x.shape == (2, 32, 32)
        assert x.min() == 0.0 and np.isclose(x.max(), 31 / 32)

    def test_max_resolved_wavenumber(self):
        assert Grid(2, 32).max_resolved_wavenumber == 10
        assert Grid(2, 16).max_resolved_wavenumber == 5


class TestTransforms:
    def test_constant_field(self, grid2):
        c = np.full(grid2.shape, 3.5)
        c_hat = fft_forward(c, grid2)
        assert np.isclose(c_hat[0, 0], 3.5)
        c_hat[0, 0] = 0
        assert np.abs(c_hat).max() < 1e-14

    def test_cosine_coefficients(self, grid2):
        u = np.cos(TWO_PI * grid2.coords[0])
        u_hat = fft_forward(u, grid2)
        assert np.isclose(u_hat[1, 0], 0.5) and np.isclose(u_hat[-1, 0], 0.5)
        u_hat[1, 0] = u_hat[-1, 0] = 0
        assert np.abs(u_hat).max() < 1e-14

    def test_round_trip(self, grid2, gen):
        u = gen.standard_normal((2,) + grid2.shape)
        assert np.abs(fft_inverse(fft_forward(u, grid2), grid2) - u).max() < 1e-12

    def test_hermitian_symmetry(self, grid2, gen):
        u_hat = fft_forward(gen.standard_normal(grid2.shape), grid2)
        neg = np.roll(np.flip(u_hat, axis=(0, 1)), 1, axis=(0, 1))
        assert np.abs(u_hat - np.conj(neg)).max() < 1e-14

    def test_parseval_on_100_fields(self, gen):
        g = Grid(2, 16)
        for _ in range(100):
            u = gen.standard_normal((2,) + g.shape)
            lhs = l2_norm_sq(u, g)
            rhs = float(np.sum(np.abs(fft_forward(u, g)) ** 2))
            assert abs(lhs - rhs) <= 1e-10 * lhs

    def test_dimension_mismatch(self, grid2):
        with pytest.raises(ValueError):
            fft_forward(np.zeros((2, 16, 16)), grid2)


class TestDerivatives:
    def test_sym_gradient_shear(self, grid2):
        x = grid2.coords
        v = np.array([np.sin(TWO_PI * x[1]), np.zeros(grid2.shape)])
        eps = sym_gradient(v, grid2)
        assert np.abs(eps[0, 0]).max() < 1e-12 and np.abs(eps[1, 1]).max() < 1e-12
        assert np.allclose(eps[0, 1], np.pi * np.cos(TWO_PI * x[1]), atol=1e-12)

    def test_sym_gradient_bitwise_symmetric(self, grid3, gen):
        eps = sym_gradient(gen.standard_normal((3,) + grid3.shape), grid3)
        assert np.array_equal(eps, np.swapaxes(eps, 0, 1))

    def test_constant_has_zero_strain(self, grid2):
        v = np.ones((2,) + grid2.shape)
        assert np.abs(sym_gradient(v, grid2)).max() == 0.0

    def test_divergence_of_gradient(self, grid2):
        phi = np.sin(TWO_PI * grid2.coords[0])
        d = divergence(gradient(phi, grid2), grid2)
        assert np.allclose(d, -4 * np.pi**2 * phi, atol=1e-10)

    def test_gradient_layout(self, grid2):
        x = grid2.coords
        v = np.array([np.sin(TWO_PI * x[1]), np.zeros(grid2.shape)])
        G = gradient(v, grid2)
        # G[i, j] = d_j v_i
        assert np.allclose(G[0, 1], TWO_PI * np.cos(TWO_PI * x[1]), atol=1e-11)
        assert np.abs(G[0, 0]).max() < 1e-12


class TestLeray:
    def test_gradient_annihilated(self, grid2):
        phi = np.sin(TWO_PI * grid2.coords[0]) * np.cos(2 * TWO_PI * grid2.coords[1])
        assert np.abs(leray_project(gradient(phi, grid2), grid2)).max() < 1e-12

    def test_divfree_fixed(self, grid2, gen):
        v = random_divfree(grid2, gen)
        assert np.abs(leray_project(v, grid2) - v).max() < 1e-12

    def test_single_mode_symbol(self, grid2):
        x = grid2.coords
        c = np.cos(TWO_PI * x[0])
        P = leray_project(np.array([c, c]), grid2)
        assert np.abs(P[0]).max() < 1e-13
        assert np.allclose(P[1], c, atol=1e-13)

    def test_idempotent_and_divfree(self, grid3, gen):
        u = gen.standard_normal((3,) + grid3.shape)
        P = leray_project(u, grid3)
        assert np.abs(leray_project(P, grid3) - P).max() < 1e-12
        assert np.abs(divergence(P, grid3)).max() < 1e-12 * grid3.m * np.abs(u).max() * 10

    def test_mean_preserved(self, grid2, gen):
        u = gen.standard_normal((2,) + grid2.shape) + np.array([1.0, -2.0])[:, None, None]
        assert np.allclose(integrate(leray_project(u, grid2), grid2), integrate(u, grid2), atol=1e-14)

    def test_helmholtz(self, grid2, gen):
        u = gen.standard_normal((2,) + grid2.shape)
        rebuilt = leray_project(u, grid2) + gradient(inv_laplacian(divergence(u, grid2), grid2), grid2)
        assert np.abs(rebuilt - u).max() < 1e-10


class TestInverseLaplacian:
    def test_cosine(self, grid2):
        x = grid2.coords
        s = np.cos(TWO_PI * (2 * x[0] + x[1]))
        expect = -s / (4 * np.pi**2 * 5)
        assert np.abs(inv_laplacian(s, grid2) - expect).max() < 1e-14

    def test_constant_to_zero(self, grid2):
        assert np.abs(inv_laplacian(np.full(grid2.shape, 7.0), grid2)).max() == 0.0

    def test_two_sided_inverse(self, grid2, gen):
        phi = _band_limited(grid2, gen)
        assert np.abs(inv_laplacian(laplacian(phi, grid2), grid2) - (phi - phi.mean())).max() < 1e-10
        assert np.abs(laplacian(inv_laplacian(phi, grid2), grid2) - (phi - phi.mean())).max() < 1e-10
        assert abs(inv_laplacian(phi, grid2).mean()) < 1e-14


class TestQuadrature:
    def test_inner_of_modes(self, grid2):
        x = grid2.coords
        u = np.array([np.sin(TWO_PI * x[0]), np.cos(TWO_PI * x[1])])
        assert np.isclose(inner(u, u, grid2), 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_parseval_property(seed):
    g = Grid(2, 8)
    u = np.random.default_rng(seed).standard_normal((2,) + g.shape)
    assert np.isclose(l2_norm_sq(u, g), np.sum(np.abs(fft_forward(u, g)) ** 2), rtol=1e-10)


class TestSnapshots:
    def test_physical_round_trip(self, tmp_path, grid2, gen):
        u = gen.standard_normal((2,) + grid2.shape)
        write_snapshot(tmp_path / "u.ersf", grid2, u)
        snap = read_snapshot(tmp_path / "u.ersf")
        assert (snap.n, snap.m, snap.spectral) == (2, 32, False)
        assert np.array_equal(snap.values, u)

    def test_header_layout(self, tmp_path, grid2):
        write_snapshot(tmp_path / "u.ersf", grid2, np.zeros(grid2.shape))
        raw = (tmp_path / "u.ersf").read_bytes()
        assert raw[:4] == b"ERSF"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:12], "little") == 2
        assert int.from_bytes(raw[12:16], "little") == 32
        assert raw[16] == 0
        assert len(raw) == 17 + 8 * 32 * 32

    def test_spectral_round_trip(self, tmp_path, grid2, gen):
        u_hat = fft_forward(gen.standard_normal(grid2.shape), grid2)
        write_snapshot(tmp_path / "s.ersf", grid2, u_hat, spectral=True)
        snap = read_snapshot(tmp_path / "s.ersf")
        assert snap.spectral and np.array_equal(snap.values, u_hat)

    def test_time_axis(self, tmp_path, grid2, gen):
        p = gen.uniform(1.5, 2.5, (3,) + grid2.shape)
        write_snapshot(tmp_path / "p.ersf", grid2, p, times=[0.0, 0.5, 1.0])
        snap = read_snapshot(tmp_path / "p.ersf")
        assert np.array_equal(snap.times, [0.0, 0.5, 1.0])
        assert np.array_equal(snap.values, p)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x").write_bytes(b"NOPE" + bytes(40))
        with pytest.raises(ValueError, match="magic"):
            read_snapshot(tmp_path / "x")
