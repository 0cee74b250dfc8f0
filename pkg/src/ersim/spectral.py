"""Fourier toolkit on the unit torus [0, 1]^n, n in {2, 3}.

Conventions
-----------
* Fourier basis ``exp(2 pi i k.x)``; coefficients are normalised so that a
  constant field ``c`` has ``c`` as its zero mode (``fftn(v) / m**n``).
* Scalar fields have shape ``(m,)*n``, vector fields ``(n, m, ..)`` and tensor
  fields ``(n, n, m, ..)`` with ``T[i, j] = d_j v_i`` for gradients.
* Every differential operator zeroes the Nyquist component of the wavevector,
  so derivatives of real fields stay real.
* Quadrature is the trapezoidal rule on the uniform grid, i.e. the grid mean
  (the torus has unit volume).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``m`` points per axis on ``[0, 1]^n``."""

    n: int
    m: int
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.n}")
        if self.m < 4 or self.m % 2:
            raise ValueError(f"points per axis must be even and >= 4, got {self.m}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.n

    @property
    def spacing(self) -> float:
        return 1.0 / self.m

    @cached_property
    def coords(self) -> np.ndarray:
        """Physical coordinates, shape ``(n, m, ..)``."""
        x = np.arange(self.m) / self.m
        return np.array(np.meshgrid(*([x] * self.n), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavevectors in FFT order, shape ``(n, m, ..)``."""
        k = np.fft.fftfreq(self.m, d=1.0 / self.m)
        return np.array(np.meshgrid(*([k] * self.n), indexing="ij"))

    @cached_property
    def k_eff(self) -> np.ndarray:
        """Wavevectors with Nyquist components zeroed (used by derivatives)."""
        k = self.wavenumbers.copy()
        k[np.abs(k) == self.m // 2] = 0.0
        return k

    @cached_property
    def k2_eff(self) -> np.ndarray:
        return np.sum(self.k_eff**2, axis=0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cut = self.dealias_fraction * self.m / 2.0
        return np.all(np.abs(self.wavenumbers) < cut, axis=0)

    @property
    def max_resolved_wavenumber(self) -> int:
        """Largest |k_i| kept by the dealiasing mask."""
        cut = self.dealias_fraction * self.m / 2.0
        kmax = int(np.ceil(cut)) - 1
        return min(kmax, self.m // 2 - 1)

    def check(self, values: np.ndarray, rank: int | None = None) -> None:
        if values.shape[values.ndim - self.n:] != self.shape:
            raise ValueError(
                f"field shape {values.shape} does not end with grid shape {self.shape}"
            )
        if rank is not None and values.ndim != self.n + rank:
            raise ValueError(f"expected a rank-{rank} field, got shape {values.shape}")


def _axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(-grid.n, 0))


def fft_forward(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Physical samples -> normalised Fourier coefficients (any leading axes)."""
    grid.check(values)
    return sfft.fftn(values, axes=_axes(grid)) / grid.m**grid.n


def fft_inverse(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Normalised Fourier coefficients -> real physical samples."""
    grid.check(coeffs)
    return sfft.ifftn(coeffs * grid.m**grid.n, axes=_axes(grid)).real


def dealias(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return coeffs * grid.dealias_mask


# --- spectral-space operators --------------------------------------------

def grad_hat(u_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Gradient appended as the *last* tensor index: out[..., j] = d_j u."""
    ik = 1j * TWO_PI * grid.k_eff
    lead = u_hat.ndim - grid.n
    return np.stack([ik[j][(None,) * lead] * u_hat for j in range(grid.n)], axis=lead)


def div_hat(t_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Contract the last tensor index with d_j: out[...] = sum_j d_j t[..., j]."""
    ik = 1j * TWO_PI * grid.k_eff
    lead = t_hat.ndim - grid.n - 1
    if lead < 0 or t_hat.shape[lead] != grid.n:
        raise ValueError(f"cannot take divergence of shape {t_hat.shape}")
    out = 0
    for j in range(grid.n):
        out = out + ik[j] * t_hat[(slice(None),) * lead + (j,)]
    return out


def sym_grad_hat(v_hat: np.ndarray, grid: Grid) -> np.ndarray:
    g = grad_hat(v_hat, grid)
    return 0.5 * (g + np.swapaxes(g, -grid.n - 1, -grid.n - 2))


def leray_hat(v_hat: np.ndarray, grid: Grid) -> np.ndarray:
    k = grid.k_eff
    k2 = grid.k2_eff
    safe = np.where(k2 > 0, k2, 1.0)
    kdotv = np.sum(k * v_hat, axis=-grid.n - 1)
    coef = np.where(k2 > 0, kdotv / safe, 0.0)
    return v_hat - k * np.expand_dims(coef, -grid.n - 1)


def laplacian_hat(u_hat: np.ndarray, grid: Grid) -> np.ndarray:
    return -(TWO_PI**2) * grid.k2_eff * u_hat


def inv_laplacian_hat(u_hat: np.ndarray, grid: Grid) -> np.ndarray:
    k2 = grid.k2_eff
    safe = np.where(k2 > 0, k2, 1.0)
    return np.where(k2 > 0, -u_hat / (TWO_PI**2 * safe), 0.0)


# --- physical-space wrappers ---------------------------------------------

def gradient(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Gradient of a scalar (-> vector) or vector (-> tensor, G[i, j] = d_j v_i)."""
    grid.check(field)
    return fft_inverse(grad_hat(fft_forward(field, grid), grid), grid)


def divergence(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Divergence of a vector (-> scalar) or row-wise of a tensor (-> vector)."""
    grid.check(field)
    return fft_inverse(div_hat(fft_forward(field, grid), grid), grid)


def sym_gradient(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Symmetric gradient eps(v) = (grad v + grad v^T) / 2, exactly symmetric."""
    grid.check(v, rank=1)
    g = gradient(v, grid)
    return 0.5 * (g + np.swapaxes(g, 0, 1))


def laplacian(u: np.ndarray, grid: Grid) -> np.ndarray:
    return fft_inverse(laplacian_hat(fft_forward(u, grid), grid), grid)


def inv_laplacian(s: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero-mean solution of Delta u = s - mean(s).

    Like every derivative operator here it ignores the Nyquist modes, which
    keeps it consistent with ``gradient``/``divergence`` (exact Helmholtz split).
    """
    grid.check(s)
    return fft_inverse(inv_laplacian_hat(fft_forward(s, grid), grid), grid)


def leray_project(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Divergence-free part of ``v``; the mean mode is kept."""
    grid.check(v, rank=1)
    return fft_inverse(leray_hat(fft_forward(v, grid), grid), grid)


def integrate(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Trapezoidal quadrature over the torus (reduces the trailing grid axes)."""
    grid.check(f)
    return np.mean(f, axis=_axes(grid))


def inner(u: np.ndarray, v: np.ndarray, grid: Grid) -> float:
    """L2 inner product of two fields of equal rank."""
    return float(np.sum(integrate(u * v, grid)))


def l2_norm_sq(u: np.ndarray, grid: Grid) -> float:
    return inner(u, u, grid)


# --- binary snapshots ----------------------------------------------------

MAGIC = b"ERSF"
_HEADER = struct.Struct("<4sIIIB")


@dataclass
class Snapshot:
    n: int
    m: int
    spectral: bool
    values: np.ndarray
    times: np.ndarray | None = None


def write_snapshot(path, grid: Grid, values: np.ndarray, spectral: bool = False,
                   times=None) -> None:
    """Write a field (or a stack of time slices when ``times`` is given).

    Version 1 holds a single field; version 2 prefixes ``u32 nt`` and ``nt``
    float64 times, and the values carry a leading time axis.
    """
    values = np.asarray(values)
    grid.check(values)
    version = 1 if times is None else 2
    with open(Path(path), "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, version, grid.n, grid.m, int(bool(spectral))))
        if times is not None:
            times = np.asarray(times, dtype="<f8")
            if values.shape[0] != times.size:
                raise ValueError("leading axis must match the number of times")
            fh.write(struct.pack("<I", times.size))
            fh.write(times.tobytes())
        if spectral:
            c = np.asarray(values, dtype=np.complex128)
            inter = np.stack([c.real, c.imag], axis=-1).astype("<f8")
            fh.write(inter.tobytes())
        else:
            fh.write(np.asarray(values, dtype="<f8").tobytes())


def read_snapshot(path) -> Snapshot:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for a snapshot header")
    magic, version, n, m, flag = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version not in (1, 2):
        raise ValueError(f"unsupported snapshot version {version}")
    offset = _HEADER.size
    times = None
    if version == 2:
        (nt,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        times = np.frombuffer(raw, dtype="<f8", count=nt, offset=offset).copy()
        offset += 8 * nt
    data = np.frombuffer(raw, dtype="<f8", offset=offset).copy()
    per_field = m**n * (2 if flag else 1)
    if data.size % per_field:
        raise ValueError("payload size is not a multiple of the grid size")
    lead = data.size // per_field
    if flag:
        data = data.reshape(-1, 2)
        data = data[:, 0] + 1j * data[:, 1]
    values = data.reshape((lead,) + (m,) * n)
    if times is not None:
        values = values.reshape((times.size, -1) + (m,) * n)
        if values.shape[1] == 1:
            values = values[:, 0]
    elif lead == 1:
        values = values[0]
    return Snapshot(n=n, m=m, spectral=bool(flag), values=values, times=times)
