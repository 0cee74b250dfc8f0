"""Power-law extra stress with a variable exponent.

All functions act pointwise on symmetric tensors stored with the two tensor
indices first, ``eta[i, j, ...]``; any trailing (grid) axes broadcast against
the exponent ``p``.  The potential uses ``(1 + |eta|)`` with the Frobenius
norm; variants with ``(1 + |eta|^2)^(1/2)`` differ only by constants.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StressParams:
    mu: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"viscosity mu must be positive, got {self.mu}")


def _check(eta: np.ndarray, p) -> None:
    eta = np.asarray(eta)
    if eta.ndim < 2 or eta.shape[0] != eta.shape[1]:
        raise ValueError(f"expected a square tensor, got shape {eta.shape}")
    if not np.allclose(eta, np.swapaxes(eta, 0, 1), rtol=1e-12, atol=1e-14):
        raise ValueError("tensor argument must be symmetric")
    if np.any(np.asarray(p) <= 1.0):
        raise ValueError("exponent must exceed 1")


def frobenius(eta: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(eta * eta, axis=(0, 1)))


def contract(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Double contraction a:b over the two leading indices."""
    return np.sum(a * b, axis=(0, 1))


def stress_unchecked(eta: np.ndarray, p, mu: float) -> np.ndarray:
    factor = (1.0 + frobenius(eta)) ** (np.asarray(p) - 2.0)
    return mu * factor * eta


def stress(eta, p, params: StressParams = StressParams()) -> np.ndarray:
    """S(eta) = mu (1 + |eta|)^(p-2) eta."""
    eta = np.asarray(eta, dtype=float)
    _check(eta, p)
    return stress_unchecked(eta, p, params.mu)


def f_p(eta, p) -> np.ndarray:
    """F_p(eta) = (1 + |eta|)^((p-2)/2) eta, so that S(eta):eta = mu |F_p(eta)|^2."""
    eta = np.asarray(eta, dtype=float)
    _check(eta, p)
    return f_p_unchecked(eta, p)


def f_p_unchecked(eta: np.ndarray, p) -> np.ndarray:
    return (1.0 + frobenius(eta)) ** (0.5 * (np.asarray(p) - 2.0)) * eta


def stress_form(eta, zeta, p, params: StressParams = StressParams()):
    """Second variation D S(eta)(zeta, zeta) of the stress law.

    D S(eta) zeta = mu (1+|eta|)^(p-2) zeta
                    + mu (p-2) (1+|eta|)^(p-3) (eta:zeta / |eta|) eta,
    the radial term vanishing at eta = 0.
    """
    eta = np.asarray(eta, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    _check(eta, p)
    _check(zeta, p)
    p = np.asarray(p, dtype=float)
    a = frobenius(eta)
    base = 1.0 + a
    ez = contract(eta, zeta)
    zz = contract(zeta, zeta)
    safe = np.where(a > 0, a, 1.0)
    radial = np.where(a > 0, ez * ez / safe, 0.0)
    return params.mu * (base ** (p - 2.0) * zz + (p - 2.0) * base ** (p - 3.0) * radial)


def coercivity_constant(p, params: StressParams = StressParams()):
    """c with D S(eta)(zeta, zeta) >= c (1+|eta|)^(p-2) |zeta|^2."""
    return np.minimum(np.asarray(p, dtype=float) - 1.0, 1.0) * params.mu


def monotonicity_gap(eta1, eta2, p, params: StressParams = StressParams()):
    """(S(eta1) - S(eta2)) : (eta1 - eta2); nonnegative for every p > 1."""
    s1 = stress(eta1, p, params)
    s2 = stress(eta2, p, params)
    return contract(s1 - s2, np.asarray(eta1, float) - np.asarray(eta2, float))
