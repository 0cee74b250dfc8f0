"""Random variable exponents p(omega, t, x) and their admissibility windows."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .spectral import Grid, fft_inverse, grad_hat

MODELS = ("constant", "frozen_fourier", "ou_time")
REGIMES = ("martingale", "strong", "pathwise")

# tanh steepness of the sigmoid squashing into [p-, p+]
_STEEPNESS = 1.5
# margin kept below c_p when the amplitude is rescaled
_SAFETY = 0.95


@dataclass(frozen=True)
class ExponentBounds:
    p_minus: float
    p_plus: float
    n: int = 2
    c_p: float | None = None

    def __post_init__(self):
        if not 1.0 < self.p_minus <= self.p_plus < math.inf:
            raise ValueError(
                f"need 1 < p_minus <= p_plus < inf, got {self.p_minus}, {self.p_plus}"
            )
        if self.n not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if self.c_p is not None and self.c_p <= 0:
            raise ValueError("c_p must be positive")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.p_minus + self.p_plus)

    def windows(self) -> dict[str, list[tuple[str, bool]]]:
        """Every inequality of every window, as (description, holds)."""
        n, lo, hi = self.n, self.p_minus, self.p_plus
        return {
            "martingale": [
                (f"3n/(n+2) = {3 * n / (n + 2):.6g} < p- = {lo:.6g}", 3 * n / (n + 2) < lo),
                (f"p+ = {hi:.6g} < (n+2)p-/n = {(n + 2) * lo / n:.6g}", hi < (n + 2) * lo / n),
            ],
            "relaxed": [
                (f"p- = {lo:.6g} >= 2", lo >= 2.0),
                (f"(3n-4)/n = {(3 * n - 4) / n:.6g} < p- = {lo:.6g}", (3 * n - 4) / n < lo),
                (f"p+ = {hi:.6g} < n p- + 4 = {n * lo + 4:.6g}", hi < n * lo + 4),
            ],
            "strong": (
                [(f"n = 2 and p+ = {hi:.6g} < 4", hi < 4.0)]
                if n == 2 else
                [
                    (f"n = 3 and 11/5 < p- = {lo:.6g}", 11.0 / 5.0 < lo),
                    (f"p+ = {hi:.6g} <= p- + 4/5 = {lo + 0.8:.6g}", hi <= lo + 0.8),
                ]
            ),
            "pathwise": [
                (f"(n+2)/2 = {(n + 2) / 2:.6g} <= p- = {lo:.6g}", (n + 2) / 2 <= lo),
                (f"p+ = {hi:.6g} < n p- + 4 = {n * lo + 4:.6g}", hi < n * lo + 4),
            ],
        }

    @property
    def martingale_window(self) -> bool:
        return all(ok for _, ok in self.windows()["martingale"])

    @property
    def relaxed_window(self) -> bool:
        return all(ok for _, ok in self.windows()["relaxed"])

    @property
    def strong_window(self) -> bool:
        return all(ok for _, ok in self.windows()["strong"])

    @property
    def pathwise_window(self) -> bool:
        return all(ok for _, ok in self.windows()["pathwise"])


@dataclass
class AdmissibilityReport:
    regime: str
    admissible: bool
    violations: list[str]
    windows: dict[str, bool]

    def __str__(self) -> str:
        status = "admissible" if self.admissible else "NOT admissible"
        lines = [f"{self.regime}: {status}"]
        lines += [f"  violated: {v}" for v in self.violations]
        return "\n".join(lines)


def check_admissibility(bounds: ExponentBounds, regime: str) -> AdmissibilityReport:
    """Test the exponent bounds against one existence/uniqueness regime.

    ``martingale`` accepts either the basic window or, when p- >= 2, the
    relaxed one.  ``strong`` checks the two-/three-dimensional windows of the
    pathwise-strong solution only; whether the martingale window also holds is
    reported in ``windows``.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    w = bounds.windows()
    flags = {
        "martingale": bounds.martingale_window,
        "relaxed": bounds.relaxed_window,
        "strong": bounds.strong_window,
        "pathwise": bounds.pathwise_window,
    }
    if regime == "martingale":
        ok = flags["martingale"] or flags["relaxed"]
        violated = [] if ok else [d for d, h in w["martingale"] if not h]
        if not ok and bounds.p_minus >= 2.0:
            violated += [f"relaxed: {d}" for d, h in w["relaxed"] if not h]
    else:
        ok = flags[regime]
        violated = [d for d, h in w[regime] if not h]
    return AdmissibilityReport(regime, ok, violated, flags)


@dataclass
class ExponentField:
    """Samples p(t_j, x_i) with linear interpolation between stored slices."""

    grid: Grid
    times: np.ndarray
    values: np.ndarray
    bounds: ExponentBounds
    model: str = "constant"
    seed: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.atleast_1d(np.asarray(self.times, dtype=float))
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.times.size,) + self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{self.times.size} slices on {self.grid.shape}"
            )
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("slice times must increase")

    @property
    def p_min(self) -> float:
        return float(self.values.min())

    @property
    def p_max(self) -> float:
        return float(self.values.max())

    def at(self, t: float) -> np.ndarray:
        """p(t, .) on the grid; constant extrapolation outside the stored range."""
        if self.times.size == 1 or t <= self.times[0]:
            return self.values[0]
        if t >= self.times[-1]:
            return self.values[-1]
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        t0, t1 = self.times[j], self.times[j + 1]
        if t == t0:
            return self.values[j]
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.values[j] + w * self.values[j + 1]

    def lipschitz_quotient(self) -> float:
        """Largest neighbour difference quotient in space over all slices."""
        h = self.grid.spacing
        q = 0.0
        for ax in range(1, self.grid.n + 1):
            d = np.abs(np.roll(self.values, -1, axis=ax) - self.values) / h
            q = max(q, float(d.max()))
        return q

    def certify(self) -> list[str]:
        """Invariant violations (empty when the field is sound)."""
        problems = []
        tol = 1e-12
        if self.p_min < self.bounds.p_minus - tol:
            problems.append(f"min p = {self.p_min} below p- = {self.bounds.p_minus}")
        if self.p_max > self.bounds.p_plus + tol:
            problems.append(f"max p = {self.p_max} above p+ = {self.bounds.p_plus}")
        if self.bounds.c_p is not None:
            total = float(np.abs(self.values).max()) + self.lipschitz_quotient()
            if total > self.bounds.c_p * (1 + tol):
                problems.append(f"sup|p| + Lipschitz quotient = {total} exceeds c_p = {self.bounds.c_p}")
        return problems


def _wavevectors(grid_n: int, bandwidth: int):
    """Half-lattice wavevectors with |k|_inf <= bandwidth and their decay weights."""
    ks = []
    rng_axes = range(-bandwidth, bandwidth + 1)
    for k in np.array(np.meshgrid(*([list(rng_axes)] * grid_n), indexing="ij")).reshape(grid_n, -1).T:
        nz = np.flatnonzero(k)
        if nz.size and k[nz[0]] > 0:
            ks.append(k)
    ks = np.array(ks, dtype=int)
    decay = 1.0 / (1.0 + np.sum(ks**2, axis=1))
    return ks, decay


def _synthesize(ks, a, b, grid: Grid):
    """g = sum_k a_k cos(2 pi k.x) + b_k sin(2 pi k.x) and its gradient on ``grid``."""
    coeffs = np.zeros(grid.shape, dtype=complex)
    m = grid.m
    for k, ak, bk in zip(ks, a, b):
        c = 0.5 * (ak - 1j * bk)
        coeffs[tuple(k % m)] += c
        coeffs[tuple(-k % m)] += np.conj(c)
    g = fft_inverse(coeffs, grid)
    dg = fft_inverse(grad_hat(coeffs, grid), grid)
    return g, dg


def _squash(g, dg, gmax, mid, half, amplitude):
    s = _STEEPNESS / gmax if gmax > 0 else 0.0
    th = np.tanh(s * g)
    p = mid + half * amplitude * th
    dp = half * amplitude * s * (1.0 - th**2) * dg
    return p, dp


def sample_exponent(model: str, bounds: ExponentBounds, grid: Grid, seed=0,
                    times=None, amplitude: float = 1.0, bandwidth: int = 2,
                    relaxation: float = 1.0, refine: int = 4) -> ExponentField:
    """Draw one exponent realization.

    A band-limited Gaussian field ``g`` is mapped into ``[p-, p+]`` by
    ``p = mid + half * amplitude * tanh(1.5 g / max|g|)``, which never leaves
    the open interval.  When ``bounds.c_p`` is set, the amplitude is shrunk
    until ``sup|p| + sup|grad p| <= c_p`` (the supremum taken on a ``refine``-times
    finer grid, with a 5% margin).  ``ou_time`` lets the Fourier weights follow
    stationary Ornstein-Uhlenbeck processes with rate ``relaxation``, drawn
    from a stream independent of the velocity noise.
    """
    if model not in MODELS:
        raise ValueError(f"unknown exponent model {model!r}; expected one of {MODELS}")
    if bounds.n != grid.n:
        raise ValueError("bounds and grid dimensions differ")
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    mid, half = bounds.midpoint, 0.5 * (bounds.p_plus - bounds.p_minus)
    times = np.array([0.0]) if times is None else np.atleast_1d(np.asarray(times, float))
    if model != "ou_time":
        times = times[:1]
    if bounds.c_p is not None and bounds.c_p < mid:
        raise ValueError(
            f"infeasible exponent request: c_p = {bounds.c_p} is below sup|p| >= {mid}"
        )

    if model == "constant" or amplitude == 0.0 or half == 0.0:
        values = np.full((times.size,) + grid.shape, mid)
        return ExponentField(grid, times, values, bounds, model, seed,
                             {"amplitude": 0.0 if model != "constant" else amplitude})

    gen = rng.stream(seed, rng.EXPONENT)
    ks, decay = _wavevectors(grid.n, bandwidth)
    nk = len(ks)
    if model == "frozen_fourier":
        a = gen.standard_normal((1, nk)) * decay
        b = gen.standard_normal((1, nk)) * decay
    else:
        a = np.empty((times.size, nk))
        b = np.empty((times.size, nk))
        a[0], b[0] = gen.standard_normal(nk), gen.standard_normal(nk)
        for j in range(1, times.size):
            rho = math.exp(-relaxation * (times[j] - times[j - 1]))
            sd = math.sqrt(1.0 - rho * rho)
            a[j] = rho * a[j - 1] + sd * gen.standard_normal(nk)
            b[j] = rho * b[j - 1] + sd * gen.standard_normal(nk)
        a *= decay
        b *= decay

    fine = Grid(grid.n, grid.m * refine)
    stride = (slice(None, None, refine),) * grid.n
    coarse, sup_dp = [], 0.0
    for j in range(a.shape[0]):
        g, dg = _synthesize(ks, a[j], b[j], fine)
        gmax = float(np.abs(g).max())
        _, dp = _squash(g, dg, gmax, mid, half, 1.0)
        sup_dp = max(sup_dp, float(np.sqrt(np.sum(dp**2, axis=0)).max()))
        coarse.append((g[stride], gmax))

    amp = amplitude
    if bounds.c_p is not None:
        # sup|p| <= mid + half*amp and sup|grad p| = amp * sup_dp (unit amplitude)
        budget = _SAFETY * bounds.c_p - mid
        if budget <= 0:
            raise ValueError(
                f"infeasible exponent request: c_p = {bounds.c_p} leaves no room "
                f"for a non-constant field around {mid}"
            )
        amp = min(amplitude, budget / (half + sup_dp))

    values = np.array([
        mid + half * amp * np.tanh(_STEEPNESS / gmax * g) if gmax > 0 else np.full(grid.shape, mid)
        for g, gmax in coarse
    ])
    out = ExponentField(grid, times, values, bounds, model, seed,
                        {"amplitude": amp, "bandwidth": bandwidth, "relaxation": relaxation})
    problems = out.certify()
    if problems:
        raise ValueError("sampled exponent failed certification: " + "; ".join(problems))
    return out


def constant_exponent(p: float, grid: Grid, c_p: float | None = None) -> ExponentField:
    """Deterministic p == const on the whole space-time cylinder."""
    bounds = ExponentBounds(p, p, grid.n, c_p)
    return sample_exponent("constant", bounds, grid)


def _pair_distance(X, Y, periodic_dims):
    d = np.abs(X - Y)
    d[..., periodic_dims] = np.minimum(d[..., periodic_dims], 1.0 - d[..., periodic_dims])
    return np.sqrt(np.sum(d**2, axis=-1))


def log_holder_modulus(field: ExponentField, max_pairs: int = 10**6, seed=0,
                       chunk: int = 2048) -> float:
    """Largest |1/p(X) - 1/p(Y)| log(e + 1/|X - Y|) over sampled space-time pairs.

    Spatial distances use the torus metric.  All pairs are enumerated when
    there are at most ``max_pairs`` of them; otherwise ``max_pairs`` random
    pairs are drawn.
    """
    grid = field.grid
    nt = field.times.size
    xs = grid.coords.reshape(grid.n, -1).T
    if nt > 1:
        pts = np.concatenate([
            np.column_stack([np.full(len(xs), t), xs]) for t in field.times
        ])
        periodic = list(range(1, grid.n + 1))
    else:
        pts = xs
        periodic = list(range(grid.n))
    inv = 1.0 / field.values.reshape(-1)
    npts = len(pts)
    total_pairs = npts * (npts - 1) // 2
    best = 0.0
    if total_pairs <= max_pairs:
        for start in range(0, npts, chunk):
            i = np.arange(start, min(start + chunk, npts))
            d = _pair_distance(pts[i, None, :], pts[None, :, :], periodic)
            diff = np.abs(inv[i, None] - inv[None, :])
            mask = d > 0
            val = np.where(mask, diff * np.log(np.e + 1.0 / np.where(mask, d, 1.0)), 0.0)
            best = max(best, float(val.max()))
        return best
    gen = rng.stream(seed, 99)
    i = gen.integers(0, npts, max_pairs)
    j = gen.integers(0, npts, max_pairs)
    keep = i != j
    i, j = i[keep], j[keep]
    d = _pair_distance(pts[i], pts[j], periodic)
    mask = d > 0
    val = np.abs(inv[i] - inv[j])[mask] * np.log(np.e + 1.0 / d[mask])
    return float(val.max()) if val.size else 0.0
