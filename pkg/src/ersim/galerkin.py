"""Galerkin reduction onto the Stokes eigenbasis of the torus.

On T^n the Stokes eigenfunctions are explicit: the ``n`` constant fields
(eigenvalue 1) followed by ``sqrt(2) cos(2 pi k.x) d`` and
``sqrt(2) sin(2 pi k.x) d`` for every half-lattice wavevector ``k`` and unit
``d`` orthogonal to ``k`` (eigenvalue ``1 + 4 pi^2 |k|^2``).  Modes are ordered
by |k|^2, then k in descending lexicographic order (so k = (1, 0) precedes
(0, 1)), then cos before sin, then direction index.

The velocity ``v = sum_k c_k w_k`` is carried as the coefficient vector ``C``;
synthesis and analysis go through the FFT coefficient array, so every
projection onto the basis is exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .spectral import Grid, TWO_PI, fft_forward, fft_inverse

CONST, COS, SIN = 0, 1, 2


@dataclass(frozen=True)
class Mode:
    k: tuple[int, ...]
    kind: int
    direction: tuple[float, ...]

    @property
    def k2(self) -> int:
        return sum(x * x for x in self.k)

    @property
    def eigenvalue(self) -> float:
        return 1.0 + TWO_PI**2 * self.k2


def _orthogonal_directions(k: np.ndarray) -> list[np.ndarray]:
    n = k.size
    kn = k / np.linalg.norm(k)
    if n == 2:
        return [np.array([-kn[1], kn[0]])]
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(kn)))] = 1.0
    d1 = np.cross(kn, axis)
    d1 /= np.linalg.norm(d1)
    d2 = np.cross(kn, d1)
    d2 /= np.linalg.norm(d2)
    return [d1, d2]


def _half_lattice(n: int, radius: int):
    for k in itertools.product(range(-radius, radius + 1), repeat=n):
        nz = [x for x in k if x != 0]
        if nz and nz[0] > 0:
            yield k


def _order_key(k):
    return (sum(x * x for x in k), tuple(-x for x in k))


def enumerate_modes(n: int, count: int, include_constants: bool = True) -> list[Mode]:
    """The first ``count`` Stokes eigenmodes in canonical order."""
    modes: list[Mode] = []
    if include_constants:
        for i in range(n):
            d = np.zeros(n)
            d[i] = 1.0
            modes.append(Mode((0,) * n, CONST, tuple(d)))
    radius = 1
    while True:
        ks = sorted(_half_lattice(n, radius), key=_order_key)
        # every shell with |k|^2 <= radius^2 is complete inside the box
        complete = [k for k in ks if sum(x * x for x in k) <= radius * radius]
        per_k = 2 * (n - 1)
        if len(modes) + per_k * len(complete) >= count:
            break
        radius += 1
    for k in complete:
        dirs = _orthogonal_directions(np.array(k, dtype=float))
        for kind in (COS, SIN):
            for d in dirs:
                modes.append(Mode(tuple(k), kind, tuple(d)))
        if len(modes) >= count:
            break
    return modes[:count]


def count_modes_within(n: int, radius: float) -> int:
    """Number of basis modes (constants included) with |k| <= radius."""
    r = int(math.floor(radius))
    ks = [k for k in _half_lattice(n, r) if sum(x * x for x in k) <= radius * radius]
    return n + 2 * (n - 1) * len(ks)


class GalerkinBasis:
    """Orthonormal divergence-free basis ``w_1..w_N`` sampled on ``grid``."""

    def __init__(self, N: int, grid: Grid, modes: list[Mode] | None = None):
        if N < 1:
            raise ValueError("basis dimension must be positive")
        self.grid = grid
        self.modes = modes if modes is not None else enumerate_modes(grid.n, N)
        if len(self.modes) != N:
            raise ValueError("mode list length differs from N")
        kmax = max(max(abs(x) for x in md.k) for md in self.modes)
        if kmax > grid.max_resolved_wavenumber:
            raise ValueError(
                f"N = {N} needs |k_i| up to {kmax}, but grid m = {grid.m} resolves "
                f"only {grid.max_resolved_wavenumber} after dealiasing"
            )
        self.N = N
        m = grid.m
        k = np.array([md.k for md in self.modes], dtype=int)
        self._d = np.array([md.direction for md in self.modes])  # (N, n)
        kinds = np.array([md.kind for md in self.modes])
        self._pos = np.ravel_multi_index(tuple((k % m).T), grid.shape)
        self._neg = np.ravel_multi_index(tuple((-k % m).T), grid.shape)
        r2 = 1.0 / math.sqrt(2.0)
        self._amp = np.where(kinds == CONST, 1.0, np.where(kinds == COS, r2, -1j * r2))
        self._is_const = kinds == CONST
        self.kinds = kinds
        self.k2 = np.sum(k**2, axis=1).astype(float)
        self.eigenvalues = 1.0 + TWO_PI**2 * self.k2

    # --- coefficient <-> field maps ----------------------------------------
    def synthesize_hat(self, C: np.ndarray) -> np.ndarray:
        """Fourier coefficients of v = sum_k C_k w_k, shape (n, m, ..)."""
        C = np.asarray(C, dtype=float)
        n = self.grid.n
        flat = np.zeros((n, self.grid.m**n), dtype=complex)
        a = C * self._amp  # (N,)
        contrib = self._d.T * a  # (n, N)
        np.add.at(flat, (slice(None), self._pos), contrib)
        osc = ~self._is_const
        np.add.at(flat, (slice(None), self._neg[osc]), np.conj(contrib[:, osc]))
        return flat.reshape((n,) + self.grid.shape)

    def synthesize(self, C: np.ndarray) -> np.ndarray:
        return fft_inverse(self.synthesize_hat(C), self.grid)

    def analyze_hat(self, u_hat: np.ndarray) -> np.ndarray:
        """<u, w_k>_{L^2} from the Fourier coefficients of a real vector field."""
        n = self.grid.n
        flat = u_hat.reshape((n, -1))
        proj = np.sum(flat[:, self._pos] * self._d.T, axis=0)  # (N,)
        # <u, w> = 2 Re(conj(amp) * proj) for oscillatory modes, Re(proj) for constants
        return np.where(self._is_const, proj.real, 2.0 * (np.conj(self._amp) * proj).real)

    def analyze(self, u: np.ndarray) -> np.ndarray:
        return self.analyze_hat(fft_forward(u, self.grid))

    def mode_field(self, j: int) -> np.ndarray:
        C = np.zeros(self.N)
        C[j] = 1.0
        return self.synthesize(C)

    @cached_property
    def gram(self) -> np.ndarray:
        fields = np.array([self.mode_field(j) for j in range(self.N)])
        flat = fields.reshape(self.N, -1)
        return flat @ flat.T / self.grid.m**self.grid.n


def build_basis(N: int, grid: Grid) -> GalerkinBasis:
    return GalerkinBasis(N, grid)


def project_initial(v0: np.ndarray, basis: GalerkinBasis) -> np.ndarray:
    """C_0 = (<v0, w_k>)_k, the coefficients of the orthogonal projection P^N v0."""
    basis.grid.check(v0, rank=1)
    return basis.analyze(v0)
