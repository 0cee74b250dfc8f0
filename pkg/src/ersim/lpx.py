"""Modulars and Luxemburg norms in variable-exponent Lebesgue spaces.

A function on the space-time cylinder Q = (0, T) x T^n is given as samples with
a leading time axis together with the sample ``times``; the quadrature is the
trapezoidal rule in time times the grid mean in space.  With ``times=None`` the
samples live on the torus alone (unit volume).
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .constitutive import frobenius
from .spectral import Grid, sym_grad_hat, fft_forward, fft_inverse


def quadrature_weights(shape: tuple[int, ...], times=None) -> np.ndarray:
    """Weights broadcastable to ``shape`` that integrate over Q (or T^n)."""
    if times is None:
        return np.full(shape, 1.0 / np.prod(shape))
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size != shape[0]:
        raise ValueError("times must match the leading axis of the samples")
    if times.size == 1:
        raise ValueError("a space-time integral needs at least two time samples")
    dt = np.diff(times)
    wt = np.zeros(times.size)
    wt[:-1] += 0.5 * dt
    wt[1:] += 0.5 * dt
    spatial = np.prod(shape[1:])
    return (wt / spatial).reshape((-1,) + (1,) * (len(shape) - 1)) * np.ones(shape)


def _prepare(f, p, times):
    f = np.abs(np.asarray(f, dtype=float))
    if not np.all(np.isfinite(f)):
        raise ValueError("samples must be finite")
    p = np.asarray(p, dtype=float)
    try:
        p = np.broadcast_to(p, f.shape)
    except ValueError as exc:
        raise ValueError(f"exponent shape {p.shape} incompatible with samples {f.shape}") from exc
    return f, p, quadrature_weights(f.shape, times)


def modular(f, p, times=None) -> float:
    """rho(f) = integral of |f|^p over Q."""
    f, p, w = _prepare(f, p, times)
    return float(np.sum(w * f**p))


def classical_norm(f, q: float, times=None) -> float:
    f, _, w = _prepare(f, q, times)
    return float(np.sum(w * f**q) ** (1.0 / q))


def luxemburg_norm(f, p, times=None, rtol: float = 1e-13) -> float:
    """inf{k > 0 : rho(f / k) <= 1}.

    rho(f / k) is strictly decreasing in k, so the root of rho(f / k) = 1 is
    bracketed from the constant-exponent norms at p- and p+ (widened if
    needed) and handed to Brent's method.
    """
    f, p, w = _prepare(f, p, times)
    if not np.any(f > 0):
        return 0.0
    volume = float(np.sum(w))

    def excess(k):
        return float(np.sum(w * (f / k) ** p)) - 1.0

    p_lo, p_hi = float(p.min()), float(p.max())
    n_lo = float(np.sum(w * f**p_lo) ** (1.0 / p_lo))
    n_hi = float(np.sum(w * f**p_hi) ** (1.0 / p_hi))
    lo = min(n_lo, n_hi) / (1.0 + volume)
    hi = max(n_lo, n_hi) * (1.0 + volume)
    while excess(lo) <= 0.0:
        lo *= 0.5
    while excess(hi) > 0.0:
        hi *= 2.0
    return float(brentq(excess, lo, hi, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps)))


def strain_magnitude(velocities: np.ndarray, grid: Grid) -> np.ndarray:
    """|eps(v)| on the grid for a stack of velocity fields (leading axis = time)."""
    v_hat = fft_forward(np.asarray(velocities, dtype=float), grid)
    eps = fft_inverse(sym_grad_hat(v_hat, grid), grid)
    if eps.ndim == grid.n + 2:
        return frobenius(eps)
    return np.sqrt(np.sum(eps * eps, axis=(1, 2)))


def energy_functional(times, velocities, p, grid: Grid) -> float:
    """sup_t ||v(t)||_2^2 + integral over Q of |eps(v)|^p.

    ``velocities`` has shape ``(nt, n, m, ..)``; ``p`` is an array broadcastable
    to ``(nt, m, ..)`` or an object with an ``at(t)`` method.
    """
    velocities = np.asarray(velocities, dtype=float)
    times = np.asarray(times, dtype=float)
    energies = np.mean(np.sum(velocities**2, axis=1), axis=tuple(range(1, grid.n + 1)))
    if hasattr(p, "at"):
        p = np.array([p.at(t) for t in times])
    mod = modular(strain_magnitude(velocities, grid), p, times)
    return float(energies.max()) + mod
