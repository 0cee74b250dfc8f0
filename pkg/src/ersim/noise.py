"""Truncated cylindrical Wiener process and the noise coefficient Phi.

``Phi(v) e_k = g_k(v(.))`` for k = 1..K.  Families:

* ``additive``: ``g_k = c_k h_k`` with a fixed field ``h_k``.  Profile
  ``constant`` uses the unit vector ``e_(k mod n)``; profile ``modes`` uses the
  k-th oscillatory Stokes eigenfunction (unit L2 norm, ``|h_k| <= sqrt 2``).
* ``linear_multiplicative``: ``g_k(xi) = c_k xi``.
* ``bounded_gradient``: ``g_k(xi) = c_k tanh(xi)`` componentwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from . import rng
from .galerkin import enumerate_modes, GalerkinBasis
from .spectral import Grid

FAMILIES = ("additive", "linear_multiplicative", "bounded_gradient")
PROFILES = ("modes", "constant")


@dataclass
class NoiseModel:
    family: str
    coefficients: np.ndarray
    n: int = 2
    L: float | None = None
    profile: str = "modes"
    tail_weight: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}; expected one of {FAMILIES}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown additive profile {self.profile!r}")
        self.coefficients = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        required = self.required_L()
        if self.L is None:
            self.L = required
        elif self.L < required * (1 - 1e-12):
            raise ValueError(
                f"growth constant L = {self.L} is below the {required} needed by "
                f"the {self.family} family with these coefficients"
            )

    @classmethod
    def power_law(cls, family: str, K: int = 8, a: float = 1.0, gamma: float = 1.0,
                  **kw) -> "NoiseModel":
        """c_k = a k^(-gamma), k = 1..K; records the truncated tail sum of c_k^2."""
        k = np.arange(1, K + 1, dtype=float)
        tail = a * a * zeta(2 * gamma, K + 1) if 2 * gamma > 1 else np.inf
        return cls(family, a * k**-gamma, tail_weight=float(tail), **kw)

    @property
    def K(self) -> int:
        return self.coefficients.size

    @property
    def weight(self) -> float:
        return float(np.sum(self.coefficients**2))

    def required_L(self) -> float:
        """Smallest L satisfying both growth conditions for this family."""
        s = self.weight
        if self.family == "additive":
            return 2.0 * s if self.profile == "modes" else s
        return self.n * s

    def profiles(self, grid: Grid) -> np.ndarray:
        """Fixed additive fields h_k, shape (K, n, m, ..)."""
        key = ("h", grid)
        if key not in self._cache:
            if self.profile == "modes":
                modes = enumerate_modes(grid.n, self.K, include_constants=False)
                basis = GalerkinBasis(self.K, grid, modes)
                h = np.array([basis.mode_field(j) for j in range(self.K)])
            else:
                h = np.zeros((self.K, grid.n) + grid.shape)
                for k in range(self.K):
                    h[k, k % grid.n] = 1.0
            self._cache[key] = h
        return self._cache[key]

    def apply(self, v: np.ndarray, grid: Grid) -> np.ndarray:
        if grid.n != self.n:
            raise ValueError("noise model and grid dimensions differ")
        return apply_phi(v, self, grid)


def apply_phi(v: np.ndarray, model: NoiseModel, grid: Grid) -> np.ndarray:
    """The K fields g_k(v(.)), shape (K, n, m, ..)."""
    grid.check(v, rank=1)
    c = model.coefficients.reshape((-1,) + (1,) * (grid.n + 1))
    if model.family == "additive":
        return c * model.profiles(grid)
    if model.family == "linear_multiplicative":
        return c * v[None]
    if model.family == "bounded_gradient":
        return c * np.tanh(v)[None]
    raise ValueError(f"unknown noise family {model.family!r}")


def pointwise_g(xi: np.ndarray, model: NoiseModel, h_values: np.ndarray | None = None):
    """g_k(xi) for sample vectors xi (shape (S, n)); returns (K, S, n).

    For additive models ``h_values`` (shape (K, S, n)) supplies the profile at
    the sample locations.
    """
    c = model.coefficients[:, None, None]
    if model.family == "additive":
        if h_values is None:
            raise ValueError("additive models need profile values")
        return c * h_values
    if model.family == "linear_multiplicative":
        return c * xi[None]
    return c * np.tanh(xi)[None]


def pointwise_grad_sq(xi: np.ndarray, model: NoiseModel) -> np.ndarray:
    """sum_k |grad g_k(xi)|^2 (Frobenius) for sample vectors xi (S, n)."""
    s = model.weight
    if model.family == "additive":
        return np.zeros(len(xi))
    if model.family == "linear_multiplicative":
        return np.full(len(xi), s * xi.shape[1])
    sech2 = 1.0 - np.tanh(xi) ** 2
    return s * np.sum(sech2**2, axis=1)


def verify_growth(model: NoiseModel, grid: Grid, samples: int = 10**4, seed=0,
                  scale: float = 10.0) -> dict:
    """Randomized check of both growth conditions; returns the observed maxima."""
    gen = rng.stream(seed, 7)
    n = grid.n
    xi = gen.standard_normal((samples, n)) * gen.uniform(0, scale, (samples, 1))
    h_values = None
    if model.family == "additive":
        h = model.profiles(grid).reshape(model.K, n, -1)
        idx = gen.integers(0, h.shape[-1], samples)
        h_values = np.transpose(h[:, :, idx], (0, 2, 1))
    g = pointwise_g(xi, model, h_values)
    growth = np.sum(g**2, axis=(0, 2)) / (1.0 + np.sum(xi**2, axis=1))
    grad = pointwise_grad_sq(xi, model)
    out = {"growth_max": float(growth.max()), "gradient_max": float(grad.max()), "L": model.L}
    out["ok"] = out["growth_max"] <= model.L * (1 + 1e-12) and out["gradient_max"] <= model.L * (1 + 1e-12)
    return out


@dataclass
class WienerPath:
    """Increments of K independent Brownian motions on a uniform time grid."""

    increments: np.ndarray  # (steps, K)
    dt: float
    seed: object
    path_index: int = 0

    @property
    def steps(self) -> int:
        return self.increments.shape[0]

    @property
    def K(self) -> int:
        return self.increments.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    @property
    def values(self) -> np.ndarray:
        """beta_k(t_j), shape (steps + 1, K), starting at 0."""
        out = np.zeros((self.steps + 1, self.K))
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out

    def coarsen(self, factor: int) -> "WienerPath":
        """Sum consecutive increments (same Brownian path, step factor * dt)."""
        if self.steps % factor:
            raise ValueError("steps must be divisible by the coarsening factor")
        inc = self.increments.reshape(self.steps // factor, factor, self.K).sum(axis=1)
        return WienerPath(inc, self.dt * factor, self.seed, self.path_index)


def wiener_increments(K: int, dt: float, steps: int, seed=0, path_index: int = 0) -> WienerPath:
    """N(0, dt) increments; beta_k is drawn from the stream (seed, path, 0, k)."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if K < 0 or steps < 0:
        raise ValueError("K and steps must be nonnegative")
    sd = np.sqrt(dt)
    inc = np.empty((steps, K))
    for k in range(K):
        inc[:, k] = sd * rng.stream(seed, path_index, rng.VELOCITY_NOISE, k).standard_normal(steps)
    return WienerPath(inc, dt, seed, path_index)


def u0_norm(alpha) -> float:
    """Squared norm of the auxiliary space U_0: sum_k alpha_k^2 / k^2, k >= 1."""
    alpha = np.asarray(alpha, dtype=float)
    k = np.arange(1, alpha.size + 1, dtype=float)
    return float(np.sum(alpha**2 / k**2))
