"""Pressure recovery and reconstruction residuals of the momentum equation.

On the torus the pressure is fixed up to a constant, so every component is
returned with zero mean:

    pi1 = Delta^-1 div div S(eps(v)),   pi2 = -Delta^-1 div div (v (x) v),
    pi3 = Delta^-1 div f,               Phi^pi_k = -grad Delta^-1 div g_k(v).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .constitutive import stress_unchecked
from .spectral import (Grid, dealias, div_hat, fft_forward, fft_inverse, grad_hat,
                       inv_laplacian_hat, sym_grad_hat)


@dataclass
class PressureDecomposition:
    pi1: np.ndarray
    pi2: np.ndarray
    pi3: np.ndarray
    phi_pi: np.ndarray | None = None

    @property
    def pi_det(self) -> np.ndarray:
        return self.pi1 + self.pi2 + self.pi3


def _divdiv_hat(t_hat, grid):
    return div_hat(div_hat(t_hat, grid), grid)


def _pressure_hats(v_hat, p, mu, f_hat, grid, mask=True):
    cut = (lambda u: dealias(u, grid)) if mask else (lambda u: u)
    v = fft_inverse(v_hat, grid)
    eps = fft_inverse(sym_grad_hat(v_hat, grid), grid)
    S_hat = cut(fft_forward(stress_unchecked(eps, p, mu), grid))
    vv_hat = cut(fft_forward(v[:, None] * v[None, :], grid))
    pi1 = inv_laplacian_hat(_divdiv_hat(S_hat, grid), grid)
    pi2 = -inv_laplacian_hat(_divdiv_hat(vv_hat, grid), grid)
    pi3 = inv_laplacian_hat(div_hat(f_hat, grid), grid) if f_hat is not None else np.zeros_like(pi1)
    return pi1, pi2, pi3, S_hat, vv_hat


def pressure_det(v: np.ndarray, p, f: np.ndarray | None, grid: Grid, mu: float = 1.0,
                 mask: bool = True) -> PressureDecomposition:
    """Deterministic pressure components of the velocity ``v`` with exponent ``p``."""
    grid.check(v, rank=1)
    f_hat = None if f is None else fft_forward(f, grid)
    pi1, pi2, pi3, _, _ = _pressure_hats(fft_forward(v, grid), p, mu, f_hat, grid, mask)
    return PressureDecomposition(fft_inverse(pi1, grid), fft_inverse(pi2, grid),
                                 fft_inverse(pi3, grid))


def pressure_noise(v: np.ndarray, noise, grid: Grid) -> np.ndarray:
    """Phi^pi_k = -grad Delta^-1 div g_k(v), shape (K, n, m, ..)."""
    g_hat = fft_forward(noise.apply(v, grid), grid)
    return fft_inverse(_noise_pressure_hat(g_hat, grid), grid)


def _noise_pressure_hat(g_hat, grid):
    return -grad_hat(inv_laplacian_hat(div_hat(g_hat, grid), grid), grid)


# --- residuals ---------------------------------------------------------------

@dataclass
class ResidualReport:
    times: np.ndarray
    strong: np.ndarray          # ||P^N(LHS - RHS)||_2 at each recorded time
    unprojected: np.ndarray     # ||LHS - RHS||_2 without the Galerkin projection
    weak: np.ndarray            # max_l |<LHS - RHS, phi_l>| at each recorded time
    scale: float

    @property
    def max_strong(self) -> float:
        return float(self.strong.max())

    @property
    def max_weak(self) -> float:
        return float(self.weak.max())

    def passes(self, dt: float, factor: float = 10.0) -> bool:
        return self.max_strong <= factor * dt * self.scale


def _l2_hat(u_hat) -> float:
    return float(np.sum(np.abs(u_hat) ** 2))


def test_functions(basis, count: int = 20, seed=0) -> np.ndarray:
    """Coefficient vectors of ``count`` unit-norm random fields in the span of ``basis``."""
    a = rng.stream(seed, 0, rng.TEST_FUNCTIONS).standard_normal((count, basis.N))
    return a / np.linalg.norm(a, axis=1, keepdims=True)


test_functions.__test__ = False  # not a pytest test


def strong_residual(traj, zero_pi_det: bool = False, n_test: int = 20,
                    test_seed=0, coefficients: np.ndarray | None = None) -> ResidualReport:
    """Reconstruct the momentum equation along a stored trajectory.

    LHS - RHS at t_j is
        v(t_j) - v(0) - sum_i dt_i [div S - div(v (x) v) - grad pi_det + f](t_i)
                      - sum_i [Phi(v) + Phi^pi](t_i) dW_i,
    with left-point sums over the recorded times (the Euler-Maruyama
    discretization).  ``strong`` applies the Galerkin projection of the scheme,
    ``unprojected`` keeps every Fourier mode, and ``weak`` tests against
    ``n_test`` random divergence-free fields from the basis span.
    ``coefficients`` replaces the stored states (used for fault injection).
    """
    system = traj.system
    basis, grid = system.basis, system.grid
    cfg = traj.config
    C = traj.coefficients if coefficients is None else np.asarray(coefficients, float)
    times = traj.times
    if C.shape != traj.coefficients.shape:
        raise ValueError("replacement coefficients have the wrong shape")
    idx = np.rint(times / cfg.dt).astype(int)
    if np.any(np.abs(idx * cfg.dt - times) > 1e-9 * cfg.dt) or idx[0] != 0:
        raise ValueError("recorded times are not on the solver's step grid")
    W = traj.wiener
    if W is None or W.steps != cfg.steps or abs(W.dt - cfg.dt) > 1e-15 * cfg.dt:
        raise ValueError("Wiener path cadence does not match the trajectory")
    Wvals = W.values

    f = traj.forcing
    f_hat = None if f is None else fft_forward(f, grid)
    phis = test_functions(basis, n_test, test_seed)
    phi_hats = np.array([basis.synthesize_hat(a) for a in phis])

    v0_hat = basis.synthesize_hat(C[0])
    acc_hat = np.zeros_like(v0_hat)      # running RHS integral, all modes
    acc_C = np.zeros(basis.N)            # running RHS integral, projected
    nt = len(times)
    strong = np.zeros(nt)
    unproj = np.zeros(nt)
    weak = np.zeros(nt)
    for j in range(nt):
        v_hat = basis.synthesize_hat(C[j])
        lhs_hat = v_hat - v0_hat
        r_hat = lhs_hat - acc_hat
        r_C = (C[j] - C[0]) - acc_C
        strong[j] = float(np.linalg.norm(r_C))
        unproj[j] = np.sqrt(_l2_hat(r_hat))
        weak[j] = float(np.max(np.abs(np.sum((np.conj(phi_hats) * r_hat[None]).real,
                                             axis=tuple(range(1, r_hat.ndim + 1))))))
        if j == nt - 1:
            break
        dt = times[j + 1] - times[j]
        dW = Wvals[idx[j + 1]] - Wvals[idx[j]]
        rhs_hat = _rhs_hat(system, times[j], v_hat, f_hat, dt, dW, zero_pi_det)
        acc_hat = acc_hat + rhs_hat
        acc_C = acc_C + basis.analyze_hat(rhs_hat)

    scale = float(np.max(np.linalg.norm(C, axis=1)))
    if f is not None:
        scale += cfg.T * float(np.sqrt(np.mean(np.sum(f**2, axis=0))))
    return ResidualReport(times, strong, unproj, weak, scale)


def _rhs_hat(system, t, v_hat, f_hat, dt, dW, zero_pi_det):
    grid = system.grid
    pi1, pi2, pi3, S_hat, vv_hat = _pressure_hats(v_hat, system.p_at(t), system.mu, f_hat,
                                                  grid, system.dealias)
    det = div_hat(S_hat, grid) - div_hat(vv_hat, grid)
    if f_hat is not None:
        det = det + f_hat
    if not zero_pi_det:
        det = det - grad_hat(pi1 + pi2 + pi3, grid)
    out = dt * det
    if system.noise is not None and len(dW):
        v = fft_inverse(v_hat, grid)
        g_hat = fft_forward(system.noise.apply(v, grid), grid)
        g_hat = g_hat + _noise_pressure_hat(g_hat, grid)
        out = out + np.tensordot(dW, g_hat, axes=(0, 0))
    return out
