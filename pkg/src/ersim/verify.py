"""Quick invariant suites behind ``ersim verify``.

Each suite returns a list of :class:`Check`; every check is a measured value
compared against a tolerance, so the output is a machine-readable table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .constitutive import monotonicity_gap, stress, stress_form, coercivity_constant
from .estimates import uniqueness_weight
from .noise import NoiseModel, verify_growth, wiener_increments
from .pressure import pressure_det, pressure_noise, strong_residual
from .problem import Models, RandomDivFree, TaylorGreen
from .solver import SolverConfig, simulate_path
from .spectral import (Grid, divergence, fft_forward, fft_inverse, gradient, inv_laplacian,
                       laplacian, leray_project)


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    ok: bool

    def row(self) -> str:
        return f"{self.suite},{self.name},{'PASS' if self.ok else 'FAIL'},{self.value:.6e},{self.tolerance:.1e}"


def _le(suite, name, value, tol) -> Check:
    value = float(value)
    return Check(suite, name, value, tol, bool(np.isfinite(value) and value <= tol))


def _random_field(gen, grid, lead=(2,)):
    return gen.standard_normal(lead + grid.shape)


def suite_spectral(seed=0) -> list[Check]:
    g = Grid(2, 32)
    gen = rng.stream(seed, 11)
    u = _random_field(gen, g)
    s = "spectral"
    out = [_le(s, "round_trip", np.abs(fft_inverse(fft_forward(u, g), g) - u).max(), 1e-12)]
    pars = abs(np.mean(u**2) * 1 - np.sum(np.abs(fft_forward(u, g)) ** 2) / 2) / np.mean(u**2)
    out.append(_le(s, "parseval", pars, 1e-10))
    P = leray_project(u, g)
    out.append(_le(s, "leray_div_free", np.abs(divergence(P, g)).max(), 1e-12 * max(1, np.abs(u).max() * g.m)))
    out.append(_le(s, "leray_idempotent", np.abs(leray_project(P, g) - P).max(), 1e-12))
    h = P + gradient(inv_laplacian(divergence(u, g), g), g)
    out.append(_le(s, "helmholtz", np.abs(h - u).max(), 1e-10))
    # derivative operators drop the Nyquist modes, so test on a band-limited input
    phi = fft_inverse(fft_forward(gen.standard_normal(g.shape), g) * g.dealias_mask, g)
    lap_inv = laplacian(inv_laplacian(phi, g), g)
    out.append(_le(s, "inv_laplacian", np.abs(lap_inv - (phi - phi.mean())).max(), 1e-10))
    return out


def suite_constitutive(seed=0, pairs: int = 10**4) -> list[Check]:
    gen = rng.stream(seed, 12)
    s = "constitutive"
    a = gen.standard_normal((3, 3, pairs))
    b = gen.standard_normal((3, 3, pairs))
    a, b = a + a.transpose(1, 0, 2), b + b.transpose(1, 0, 2)
    p = gen.uniform(1.2, 3.8, pairs)
    gap = monotonicity_gap(a, b, p)
    out = [_le(s, "monotonicity", -gap.min(), 1e-12)]
    form = stress_form(a, b, p)
    lower = coercivity_constant(p) * (1 + np.sqrt(np.sum(a * a, axis=(0, 1)))) ** (p - 2) * np.sum(b * b, axis=(0, 1))
    out.append(_le(s, "coercivity", np.max((lower - form) / np.maximum(lower, 1e-300)), 1e-12))
    e = np.zeros((3, 3))
    out.append(_le(s, "zero_stress", np.abs(stress(e, 2.5)).max(), 0.0))
    return out


def suite_noise(seed=0) -> list[Check]:
    s = "noise"
    g = Grid(2, 16)
    out = []
    for fam in ("additive", "linear_multiplicative", "bounded_gradient"):
        res = verify_growth(NoiseModel.power_law(fam, 6), g, seed=seed)
        out.append(Check(s, f"growth_{fam}", res["growth_max"], res["L"], res["ok"]))
    M = 4096
    W = np.array([wiener_increments(1, 0.01, 50, seed, i).values[-1, 0] for i in range(M)])
    out.append(_le(s, "ito_isometry", abs(np.mean(W**2) / 0.5 - 1.0), 4 / math.sqrt(M)))
    return out


def suite_energy(seed=0) -> list[Check]:
    """Discrete energy balance for a noiseless constant-p run, with dt halving."""
    s = "energy"
    g = Grid(2, 16)
    models = Models(exponent=2.5, mu=0.1, initial=RandomDivFree(1.0, 6))
    res = []
    for dt in (2e-3, 1e-3):
        tr = simulate_path(SolverConfig(12, g, dt, 0.1, cadence=10**6, diagnostics=False), models, seed)
        C0, CT = tr.coefficients[0], tr.coefficients[-1]
        res.append(abs(0.5 * CT @ CT - 0.5 * C0 @ C0 + dt * tr.dissipation.sum()))
        e0 = 0.5 * C0 @ C0
    out = [_le(s, "balance", res[-1], 10 * 1e-3 * e0), _le(s, "halving_ratio", abs(res[1] / res[0] - 0.5), 0.1)]
    out += [_le(s, k, v, 1e-10) for k, v in tr.invariants.items()]
    return out


def suite_uniqueness(seed=0) -> list[Check]:
    s = "uniqueness"
    g = Grid(2, 16)
    noise = NoiseModel.power_law("additive", 4, 0.5, n=2)
    cfg = SolverConfig(12, g, 2e-3, 0.1, cadence=1, diagnostics=False)
    models = Models(exponent=2.5, mu=1.0, noise=noise, initial=RandomDivFree(1.0, 6))
    a = simulate_path(cfg, models, seed)
    C0 = a.coefficients[0].copy()
    C0[2] += 1e-3
    b = simulate_path(cfg, models, seed, C0=C0)
    rep = uniqueness_weight(a.times, a.velocities(), b.velocities(), 2.5, g, keys=(a.noise_key, b.noise_key))
    return [_le(s, "contraction_excess", rep.max_excess, rep.tolerance_rate)]


def suite_pressure(seed=0) -> list[Check]:
    s = "pressure"
    g = Grid(2, 32)
    gen = rng.stream(seed, 13)
    v = leray_project(_random_field(gen, g), g)
    d = pressure_det(v, 2.0, None, g)
    out = [_le(s, "pi1_newtonian_zero", np.abs(d.pi1).max(), 1e-10)]
    out.append(_le(s, "zero_mean", max(abs(d.pi1.mean()), abs(d.pi2.mean()), abs(d.pi3.mean())), 1e-12))
    noise = NoiseModel.power_law("bounded_gradient", 3)
    h = noise.apply(v, g)
    phi = pressure_noise(v, noise, g)
    # g_k + Phi^pi_k is the divergence-free part of g_k
    cons = max(np.abs(h[k] + phi[k] - leray_project(h[k], g)).max() for k in range(noise.K))
    out.append(_le(s, "helmholtz_noise", cons, 1e-10))
    cfg = SolverConfig(32, g, 1e-3, 0.02, diagnostics=False)
    tr = simulate_path(cfg, Models(exponent=2.0, mu=0.1, initial=TaylorGreen()), seed)
    r = strong_residual(tr)
    r0 = strong_residual(tr, zero_pi_det=True)
    out.append(_le(s, "strong_residual", r.max_strong, 10 * cfg.dt * r.scale))
    out.append(_le(s, "weak_pi_independent", np.abs(r.weak - r0.weak).max(), 1e-10))
    return out


SUITES = {
    "spectral": suite_spectral,
    "constitutive": suite_constitutive,
    "noise": suite_noise,
    "energy": suite_energy,
    "uniqueness": suite_uniqueness,
    "pressure": suite_pressure,
}


def run_suite(name: str, seed=0) -> list[Check]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    return SUITES[name](seed)
