"""Diagnostic functionals for the a-priori estimates of the Galerkin scheme.

The constants in the estimates are not explicit, so everything here reports
raw values and ratios; callers decide what stability means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constitutive import frobenius, f_p_unchecked
from .spectral import Grid, fft_forward, fft_inverse, grad_hat, sym_grad_hat


@dataclass(frozen=True)
class EstimateParams:
    n: int
    p_minus: float
    p_plus: float
    varrho: float = 0.01
    r: int = 1

    def __post_init__(self):
        if self.varrho <= 0:
            raise ValueError("varrho must be positive")
        if self.r < 1:
            raise ValueError("moment order r must be >= 1")

    @property
    def q_bar(self) -> float:
        return max(3.0, self.p_plus + self.varrho)

    @property
    def denominator(self) -> float:
        return self.n * self.p_minus - self.q_bar * self.n + 4.0

    @property
    def p_new_holds(self) -> bool:
        """p- > (q_bar n - 4) / n, i.e. the exponent lambda is well defined."""
        return self.denominator > 0

    @property
    def lam(self) -> float:
        """lambda = 2 (q_bar - p-) / (n p- - q_bar n + 4); NaN on the boundary."""
        den = self.denominator
        if den == 0:
            return math.nan
        return 2.0 * (self.q_bar - self.p_minus) / den


def g_lambda(theta, lam: float):
    """Concave weight (1+theta)^(1-lam)/(1-lam), or log(1+theta) at lam = 1."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    if abs(lam - 1.0) < 1e-8:
        return np.log1p(theta)
    return (1.0 + theta) ** (1.0 - lam) / (1.0 - lam)


# --- per-snapshot integrands -------------------------------------------

def _pointwise_norm(t: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(t.ndim - grid.n))
    return np.sqrt(np.sum(t * t, axis=axes))


def _lq(f: np.ndarray, q: float, grid: Grid) -> float:
    return float(np.mean(np.abs(f) ** q) ** (1.0 / q))


def snapshot_integrands(v_hat: np.ndarray, grid: Grid, p=2.0, lam: float = 0.0,
                        p_minus: float = 2.0, eps: np.ndarray | None = None) -> dict:
    """Spatial quantities of one velocity snapshot given its Fourier coefficients.

    Returns the energy, the strain modular density, the weighted second-gradient
    integrand (case a for p- >= 2, case b otherwise), |grad F_p|^2 integrated
    in space, and ||grad v||_{p-}.
    """
    v = fft_inverse(v_hat, grid)
    g1_hat = grad_hat(v_hat, grid)
    g1 = fft_inverse(g1_hat, grid)
    g2 = fft_inverse(grad_hat(g1_hat, grid), grid)
    if eps is None:
        eps = fft_inverse(sym_grad_hat(v_hat, grid), grid)
    abs_eps = frobenius(eps)
    grad_sq = float(np.mean(np.sum(g1 * g1, axis=(0, 1))))
    abs_g1 = _pointwise_norm(g1, grid)
    abs_g2 = _pointwise_norm(g2, grid)
    grad_lp = _lq(abs_g1, p_minus, grid)
    if p_minus >= 2.0:
        num = float(np.mean(abs_g2**2))
        h2 = num / (1.0 + grad_sq) ** lam
    else:
        num = _lq(abs_g2, p_minus, grid) ** 2
        h2 = num / ((1.0 + grad_sq) ** lam * (1.0 + grad_lp) ** (2.0 - p_minus))
    fp = f_p_unchecked(eps, p)
    dfp = fft_inverse(grad_hat(fft_forward(fp, grid), grid), grid)
    return {
        "energy": float(np.mean(np.sum(v * v, axis=0))),
        "modular": float(np.mean(abs_eps ** np.asarray(p))),
        "h2": h2,
        "fp_grad_sq": float(np.mean(np.sum(dfp * dfp, axis=(0, 1, 2)))),
        "grad_sq": grad_sq,
        "grad_lp": grad_lp,
    }


def _trapezoid(values, times) -> float:
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if values.size < 2:
        return 0.0
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times)))


def _p_slices(p, times):
    if hasattr(p, "at"):
        return [p.at(t) for t in times]
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return [p] * len(times)
    return list(p)


def weighted_h2(times, velocities, lam: float, p_minus: float, grid: Grid) -> float:
    """Time integral of the weighted second-gradient functional.

    p- >= 2:  ||grad^2 v||_2^2 / (1 + ||grad v||_2^2)^lam
    p- <  2:  ||grad^2 v||_{p-}^2 / ((1 + ||grad v||_2^2)^lam (1 + ||grad v||_{p-})^(2-p-))
    """
    if not np.isfinite(lam):
        raise ValueError("lambda is undefined for these exponent bounds")
    vals = [snapshot_integrands(fft_forward(v, grid), grid, 2.0, lam, p_minus)["h2"]
            for v in np.asarray(velocities, dtype=float)]
    return _trapezoid(vals, times)


def fp_gradient_norm(times, velocities, p, grid: Grid) -> float:
    """Integral over Q of |grad F_p(., eps(v))|^2, F_p differentiated spectrally."""
    vals = []
    for v, pj in zip(np.asarray(velocities, dtype=float), _p_slices(p, times)):
        vals.append(snapshot_integrands(fft_forward(v, grid), grid, pj)["fp_grad_sq"])
    return _trapezoid(vals, times)


@dataclass
class UniquenessReport:
    times: np.ndarray
    G: np.ndarray
    functional: np.ndarray
    non_increasing: bool
    max_excess: float
    tolerance_rate: float

    def __str__(self) -> str:
        status = "non-increasing" if self.non_increasing else "INCREASING"
        return (f"contraction functional {status}; max per-step relative excess "
                f"{self.max_excess:.3e} (allowed {self.tolerance_rate} * dt)")


def uniqueness_weight(times, v1, v2, p_minus: float, grid: Grid, c: float = 1.0,
                      tolerance_rate: float = 5.0, keys=None) -> UniquenessReport:
    """G(t) = c (||grad v1||_{p-}^(2p-/(2p- - n)) + 1) and exp(-int G) ||v1 - v2||^2.

    The functional passes when every step satisfies
    F_{j+1} <= F_j (1 + tolerance_rate * dt_j).  ``keys`` is a pair of noise
    identities (e.g. ``(seed, path_index)``) that must coincide.
    """
    n = grid.n
    if not 2 * p_minus > n:
        raise ValueError(f"need 2 p- > n, got p- = {p_minus}, n = {n}")
    if keys is not None and keys[0] != keys[1]:
        raise ValueError(f"trajectories were driven by different noise: {keys[0]} vs {keys[1]}")
    times = np.asarray(times, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape or v1.shape[0] != times.size:
        raise ValueError("paired trajectories must share their time samples")
    expo = 2.0 * p_minus / (2.0 * p_minus - n)
    G = np.empty(times.size)
    w2 = np.empty(times.size)
    for j in range(times.size):
        g1 = fft_inverse(grad_hat(fft_forward(v1[j], grid), grid), grid)
        G[j] = c * (_lq(_pointwise_norm(g1, grid), p_minus, grid) ** expo + 1.0)
        d = v1[j] - v2[j]
        w2[j] = float(np.mean(np.sum(d * d, axis=0)))
    intG = np.concatenate([[0.0], np.cumsum(0.5 * (G[1:] + G[:-1]) * np.diff(times))])
    F = np.exp(-intG) * w2
    dt = np.diff(times)
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = np.where(F[:-1] > 0, (F[1:] - F[:-1]) / (F[:-1] * dt), np.where(F[1:] > 0, np.inf, 0.0))
    max_excess = float(excess.max()) if excess.size else 0.0
    return UniquenessReport(times, G, F, max_excess <= tolerance_rate, max_excess, tolerance_rate)


# --- ensemble-level energy estimate ------------------------------------

@dataclass
class EnergyReport:
    r: int
    lhs: float
    lhs_stderr: float
    data_quantity: float
    ratio: float
    M: int


def data_moment(v0_norms_sq, f_norms_sq, r: int = 1) -> float:
    """1 + E||v0||_2^(2r) + E||f||_{L2(Q)}^(2r) over the sampled data."""
    v0 = np.asarray(v0_norms_sq, dtype=float)
    f = np.asarray(f_norms_sq, dtype=float)
    return float(1.0 + np.mean(v0**r) + (np.mean(f**r) if f.size else 0.0))


def energy_estimate_report(functionals, v0_norms_sq, f_norms_sq, r: int = 1) -> EnergyReport:
    """MC estimate of E[sup||v||^2 + rho(eps(v))]^r against the data moments.

    ``functionals`` holds one value of sup||v||^2 + rho(eps(v)) per path.
    """
    x = np.asarray(functionals, dtype=float) ** r
    M = x.size
    lhs = float(np.mean(x))
    se = float(np.std(x, ddof=1) / np.sqrt(M)) if M > 1 else math.nan
    dq = data_moment(v0_norms_sq, f_norms_sq, r)
    return EnergyReport(r, lhs, se, dq, lhs / dq, M)


def refinement_spread(values) -> float:
    """max/min of a positive sequence (e.g. an estimate across N-refinement)."""
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        return math.inf if np.any(values > 0) else 1.0
    return float(values.max() / values.min())
