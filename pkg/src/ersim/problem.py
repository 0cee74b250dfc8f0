"""Problem data: initial velocity, forcing and the exponent sampler.

Everything here is a small picklable value object so that ensemble workers
can rebuild the data of any path from ``(seed, path_index)`` alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .exponent import ExponentBounds, ExponentField, sample_exponent
from .galerkin import GalerkinBasis, enumerate_modes
from .spectral import Grid, TWO_PI, fft_inverse, read_snapshot


# --- initial conditions -------------------------------------------------

@dataclass(frozen=True)
class TaylorGreen:
    """v0 = A (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y) (times cos 2pi z, third component 0, in 3D)."""

    amplitude: float = 1.0

    def field(self, grid: Grid, seed=0, path_index: int = 0) -> np.ndarray:
        x = grid.coords
        sx, cx = np.sin(TWO_PI * x[0]), np.cos(TWO_PI * x[0])
        sy, cy = np.sin(TWO_PI * x[1]), np.cos(TWO_PI * x[1])
        v = np.zeros((grid.n,) + grid.shape)
        v[0] = sx * cy
        v[1] = -cx * sy
        if grid.n == 3:
            v[:2] *= np.cos(TWO_PI * x[2])
        return self.amplitude * v

    def exact(self, grid: Grid, t: float, mu: float) -> np.ndarray:
        """Closed-form solution for p == 2 and no noise: decay exp(-4 pi^2 mu t) in 2D."""
        if grid.n != 2:
            raise ValueError("the exact decaying solution is only provided in 2D")
        return self.field(grid) * math.exp(-4.0 * math.pi**2 * mu * t)


@dataclass(frozen=True)
class RandomDivFree:
    """Random combination of the first ``modes`` oscillatory Stokes modes with ||v0||^2 = energy."""

    energy: float = 1.0
    modes: int = 8

    def coefficients(self, n: int, seed=0, path_index: int = 0) -> np.ndarray:
        c = rng.stream(seed, path_index, rng.INITIAL_DATA).standard_normal(self.modes)
        return c * math.sqrt(self.energy) / np.linalg.norm(c)

    def field(self, grid: Grid, seed=0, path_index: int = 0) -> np.ndarray:
        modes = enumerate_modes(grid.n, self.modes, include_constants=False)
        basis = GalerkinBasis(self.modes, grid, modes)
        return basis.synthesize(self.coefficients(grid.n, seed, path_index))


@dataclass(frozen=True)
class FieldData:
    """Fixed field, given directly or through a snapshot file."""

    values: np.ndarray | None = None
    path: str | None = None

    def field(self, grid: Grid, seed=0, path_index: int = 0) -> np.ndarray:
        if self.values is not None:
            v = np.asarray(self.values, dtype=float)
        else:
            snap = read_snapshot(self.path)
            if (snap.n, snap.m) != (grid.n, grid.m):
                raise ValueError(f"{self.path}: stored grid n={snap.n}, m={snap.m} differs from the solver grid")
            v = fft_inverse(snap.values, grid) if snap.spectral else snap.values
        grid.check(v, rank=1)
        return v


@dataclass(frozen=True)
class FourierForcing:
    """Time-independent forcing f = amplitude * w_j for the oscillatory mode index j."""

    amplitude: float = 1.0
    mode: int = 0

    def field(self, grid: Grid, seed=0, path_index: int = 0) -> np.ndarray:
        modes = enumerate_modes(grid.n, self.mode + 1, include_constants=False)
        basis = GalerkinBasis(self.mode + 1, grid, modes)
        return self.amplitude * basis.mode_field(self.mode)


def zero_field(grid: Grid) -> np.ndarray:
    return np.zeros((grid.n,) + grid.shape)


# --- exponent -----------------------------------------------------------

@dataclass(frozen=True)
class ExponentSpec:
    """Recipe for one exponent realization per path (key (seed, path, exponent stream))."""

    model: str
    bounds: ExponentBounds
    amplitude: float = 1.0
    bandwidth: int = 2
    relaxation: float = 1.0
    per_path: bool = True

    def sample(self, grid: Grid, seed=0, path_index: int = 0, times=None) -> ExponentField:
        key = [*rng._entropy(seed), path_index] if self.per_path else seed
        return sample_exponent(self.model, self.bounds, grid, key, times,
                               self.amplitude, self.bandwidth, self.relaxation)


@dataclass
class Models:
    """Everything a path needs besides the discretization.

    ``exponent`` is a float (constant p, used as a plain scalar), an
    ``ExponentField`` shared by all paths, or an ``ExponentSpec`` sampled per
    path.  ``initial`` and ``forcing`` expose ``field(grid, seed, path_index)``
    or are plain arrays; ``forcing=None`` means f = 0.
    """

    exponent: object = 2.0
    mu: float = 1.0
    noise: object = None
    initial: object = field(default_factory=TaylorGreen)
    forcing: object = None

    def exponent_for(self, grid: Grid, seed, path_index: int, times):
        if isinstance(self.exponent, ExponentSpec):
            return self.exponent.sample(grid, seed, path_index, times)
        if isinstance(self.exponent, ExponentField):
            if self.exponent.grid != grid:
                raise ValueError("exponent field and solver grid differ")
        return self.exponent

    def exponent_bounds(self) -> tuple[float, float]:
        e = self.exponent
        if isinstance(e, ExponentSpec):
            return e.bounds.p_minus, e.bounds.p_plus
        if isinstance(e, ExponentField):
            return e.bounds.p_minus, e.bounds.p_plus
        return float(e), float(e)

    def initial_field(self, grid: Grid, seed, path_index: int) -> np.ndarray:
        return _resolve(self.initial, grid, seed, path_index)

    def forcing_field(self, grid: Grid, seed, path_index: int):
        if self.forcing is None:
            return None
        return _resolve(self.forcing, grid, seed, path_index)


def _resolve(spec, grid, seed, path_index):
    if hasattr(spec, "field"):
        return spec.field(grid, seed, path_index)
    v = np.asarray(spec, dtype=float)
    grid.check(v, rank=1)
    return v
