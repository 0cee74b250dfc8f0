"""Time integration of the Galerkin SDE and Monte Carlo ensembles.

The reduced system for the coefficient vector ``C`` reads

    dC = mu(t, C) dt + Sigma(C) dW,

with ``mu_k = <div S(eps(v)) - div(v (x) v) + f, w_k>`` and
``Sigma_kl = <g_l(v), w_k>``.  Nonlinear terms are formed on the grid,
truncated with the 2/3 mask and projected back onto the basis.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .constitutive import contract, stress_unchecked
from .estimates import EstimateParams, snapshot_integrands
from .galerkin import GalerkinBasis, build_basis, project_initial
from .noise import WienerPath, wiener_increments
from .spectral import (Grid, TWO_PI, dealias, div_hat, fft_forward, fft_inverse,
                       sym_grad_hat)

INTEGRATORS = ("euler_maruyama", "semi_implicit")


class BlowUpError(RuntimeError):
    """The state left the finite range; carries what is needed for a dump."""

    def __init__(self, message: str, t: float, step: int, C: np.ndarray):
        super().__init__(message)
        self.t = t
        self.step = step
        self.C = np.asarray(C)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# blow-up at step {self.step}, t = {self.t!r}\n# {self}\n")
            for c in self.C:
                fh.write(f"{c!r}\n")


@dataclass(frozen=True)
class SolverConfig:
    N: int
    grid: Grid
    dt: float
    T: float
    integrator: str = "euler_maruyama"
    dealias: bool = True
    cadence: int = 1
    diagnostics: bool = True
    check_invariants: bool = True
    blowup_factor: float = 1e12

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        steps = round(self.T / self.dt)
        if steps < 1 or abs(steps * self.dt - self.T) > 1e-9 * self.T:
            raise ValueError(f"T = {self.T} is not a multiple of dt = {self.dt}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}; expected one of {INTEGRATORS}")
        if self.cadence < 1:
            raise ValueError("diagnostic cadence must be at least 1")

    @property
    def steps(self) -> int:
        return round(self.T / self.dt)


@dataclass
class GalerkinState:
    t: float
    C: np.ndarray
    step: int = 0


@dataclass
class DriftParts:
    stress: np.ndarray
    convection: np.ndarray
    forcing: np.ndarray
    v: np.ndarray
    eps: np.ndarray
    S: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.stress + self.convection + self.forcing

    @property
    def dissipation(self) -> float:
        """<S(eps), eps>_{L^2} by grid quadrature."""
        return float(np.mean(contract(self.S, self.eps)))


class GalerkinSystem:
    """Drift and diffusion of the reduced SDE for fixed data."""

    def __init__(self, basis: GalerkinBasis, p=2.0, mu: float = 1.0, forcing=None,
                 noise=None, dealias: bool = True):
        if not mu > 0:
            raise ValueError("viscosity must be positive")
        self.basis = basis
        self.grid = basis.grid
        self.p = p
        self.mu = mu
        self.noise = noise
        self.dealias = dealias
        if hasattr(p, "grid") and p.grid != self.grid:
            raise ValueError("exponent field and basis grid differ")
        if forcing is not None:
            self.grid.check(forcing, rank=1)
            self.f_coeffs = basis.analyze(forcing)
        else:
            self.f_coeffs = np.zeros(basis.N)
        if noise is not None and noise.n != self.grid.n:
            raise ValueError("noise model and grid dimensions differ")
        self._sigma_additive = None
        self.newtonian_rate = 0.5 * mu * TWO_PI**2 * basis.k2

    def p_at(self, t: float):
        return self.p.at(t) if hasattr(self.p, "at") else self.p

    def _mask(self, u_hat):
        return dealias(u_hat, self.grid) if self.dealias else u_hat

    def drift_parts(self, t: float, C: np.ndarray) -> DriftParts:
        g, b = self.grid, self.basis
        n = g.n
        v_hat = b.synthesize_hat(C)
        # one batched transform each way: (v, eps) back, (S, v v) forward
        both = np.concatenate([v_hat, sym_grad_hat(v_hat, g).reshape((n * n,) + g.shape)])
        both = fft_inverse(both, g)
        v, eps = both[:n], both[n:].reshape((n, n) + g.shape)
        S = stress_unchecked(eps, self.p_at(t), self.mu)
        fluxes = fft_forward(np.stack([S, v[:, None] * v[None, :]]), g)
        fluxes = div_hat(self._mask(fluxes), g)
        stress = b.analyze_hat(fluxes[0])
        conv = -b.analyze_hat(fluxes[1])
        return DriftParts(stress, conv, self.f_coeffs, v, eps, S)

    def drift(self, t: float, C: np.ndarray) -> np.ndarray:
        return self.drift_parts(t, C).total

    def diffusion(self, C: np.ndarray, v: np.ndarray | None = None) -> np.ndarray:
        """N x K matrix Sigma_kl = <g_l(v^N), w_k>."""
        if self.noise is None:
            return np.zeros((self.basis.N, 0))
        if self.noise.family == "additive":
            if self._sigma_additive is None:
                self._sigma_additive = self._project_noise(np.zeros((self.grid.n,) + self.grid.shape))
            return self._sigma_additive
        if v is None:
            v = self.basis.synthesize(C)
        return self._project_noise(v)

    def _project_noise(self, v: np.ndarray) -> np.ndarray:
        gk = self.noise.apply(v, self.grid)
        gk_hat = fft_forward(gk, self.grid)
        return np.stack([self.basis.analyze_hat(h) for h in gk_hat], axis=1)


def step(system: GalerkinSystem, state: GalerkinState, dt: float, dW: np.ndarray,
         integrator: str = "euler_maruyama", parts: DriftParts | None = None) -> GalerkinState:
    """One step of size dt driven by the Wiener increments dW (length K)."""
    C = state.C
    if parts is None:
        parts = system.drift_parts(state.t, C)
    mu = parts.total
    incr = dt * mu
    if dW is not None and len(dW):
        incr = incr + system.diffusion(C, parts.v) @ dW
    if integrator == "euler_maruyama":
        C_new = C + incr
    elif integrator == "semi_implicit":
        a = system.newtonian_rate
        C_new = (C + incr + dt * a * C) / (1.0 + dt * a)
    else:
        raise ValueError(f"unknown integrator {integrator!r}")
    return GalerkinState(state.t + dt, C_new, state.step + 1)


# --- diagnostics ----------------------------------------------------------

CSV_SCHEMA = 1


@dataclass
class DiagnosticsRecord:
    t: float
    energy_L2: float
    modular_eps: float
    sup_energy_so_far: float
    weighted_H2: float
    Fp_grad_sq: float
    G_weight: float
    path_id: int
    seed: int

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[str]:
        vals = [getattr(self, c) for c in self.columns()]
        return [repr(float(v)) if isinstance(v, float) else str(v) for v in vals]


def write_diagnostics_csv(path, records) -> None:
    """CSV with a schema comment line followed by the header row."""
    with open(path, "w", newline="") as fh:
        fh.write(f"#schema={CSV_SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DiagnosticsRecord.columns())
        for r in records:
            w.writerow(r.row())


def read_diagnostics_csv(path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"#schema={CSV_SCHEMA}":
            raise ValueError(f"{path}: unsupported diagnostics schema line {first!r}")
        reader = csv.reader(fh)
        header = next(reader)
        if header != DiagnosticsRecord.columns():
            raise ValueError(f"{path}: unexpected columns {header}")
        out = []
        for row in reader:
            vals = [float(x) for x in row[:7]] + [int(row[7]), int(row[8])]
            out.append(DiagnosticsRecord(*vals))
    return out


class _Accumulator:
    """Running time integrals of the per-snapshot functionals (trapezoid rule)."""

    def __init__(self, grid: Grid, p_minus: float, p_plus: float, path_id: int, seed,
                 c_weight: float = 1.0):
        self.grid = grid
        est = EstimateParams(grid.n, p_minus, p_plus)
        self.lam = est.lam if est.p_new_holds else math.nan
        self.p_minus = p_minus
        self.c = c_weight
        self.path_id = path_id
        self.seed = seed if isinstance(seed, (int, np.integer)) else -1
        self.prev = None
        self.totals = {"modular": 0.0, "h2": 0.0, "fp_grad_sq": 0.0}
        self.sup_energy = 0.0
        self.records: list[DiagnosticsRecord] = []

    def add(self, t: float, v_hat: np.ndarray, p) -> DiagnosticsRecord:
        lam = self.lam if np.isfinite(self.lam) else 0.0
        q = snapshot_integrands(v_hat, self.grid, p, lam, self.p_minus)
        if not np.isfinite(self.lam):
            q["h2"] = math.nan
        if self.prev is not None:
            t0, q0 = self.prev
            for key in self.totals:
                self.totals[key] += 0.5 * (t - t0) * (q[key] + q0[key])
        self.prev = (t, q)
        self.sup_energy = max(self.sup_energy, q["energy"])
        n = self.grid.n
        if 2 * self.p_minus > n:
            G = self.c * (q["grad_lp"] ** (2 * self.p_minus / (2 * self.p_minus - n)) + 1.0)
        else:
            G = math.nan
        rec = DiagnosticsRecord(float(t), q["energy"], self.totals["modular"], self.sup_energy,
                                self.totals["h2"], self.totals["fp_grad_sq"], float(G),
                                int(self.path_id), int(self.seed))
        self.records.append(rec)
        return rec


# --- paths ----------------------------------------------------------------

@dataclass
class Trajectory:
    """States recorded every ``cadence`` steps plus the data that produced them."""

    config: SolverConfig
    system: GalerkinSystem
    times: np.ndarray
    coefficients: np.ndarray
    wiener: WienerPath | None
    seed: object
    path_index: int
    forcing: np.ndarray | None
    dissipation: np.ndarray
    invariants: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    @property
    def basis(self) -> GalerkinBasis:
        return self.system.basis

    @property
    def grid(self) -> Grid:
        return self.system.grid

    @property
    def exponent(self):
        return self.system.p

    @property
    def noise_key(self):
        return (tuple(np.atleast_1d(self.seed).tolist()), self.path_index)

    def velocity(self, j: int) -> np.ndarray:
        return self.basis.synthesize(self.coefficients[j])

    def velocities(self) -> np.ndarray:
        return np.array([self.velocity(j) for j in range(len(self.times))])

    def summary(self) -> dict:
        last = self.diagnostics[-1] if self.diagnostics else None
        f2 = float(np.mean(np.sum(self.forcing**2, axis=0))) * self.config.T if self.forcing is not None else 0.0
        out = {
            "v0_norm_sq": float(self.coefficients[0] @ self.coefficients[0]),
            "f_norm_sq": f2,
            "final_energy": float(self.coefficients[-1] @ self.coefficients[-1]),
            "C_T": self.coefficients[-1].copy(),
        }
        if last is not None:
            out.update({
                "energy_functional": last.sup_energy_so_far + last.modular_eps,
                "sup_energy": last.sup_energy_so_far,
                "modular_eps": last.modular_eps,
                "weighted_H2": last.weighted_H2,
                "Fp_grad_sq": last.Fp_grad_sq,
            })
        return out


def simulate_path(config: SolverConfig, models, seed=0, path_index: int = 0,
                  wiener: WienerPath | None = None, C0: np.ndarray | None = None,
                  check_admissible: str | None = None) -> Trajectory:
    """Integrate one path; reproducible from (config, models, seed, path_index).

    ``wiener`` overrides the generated Brownian increments (it must have the
    configured step count); ``C0`` overrides the projected initial datum.
    ``check_admissible`` names a regime whose exponent window must hold.
    """
    grid = config.grid
    steps = config.steps
    times_all = np.arange(steps + 1) * config.dt
    if check_admissible is not None:
        from .exponent import ExponentBounds, check_admissibility
        lo, hi = models.exponent_bounds()
        report = check_admissibility(ExponentBounds(lo, hi, grid.n), check_admissible)
        if not report.admissible:
            raise ValueError(str(report))
    basis = build_basis(config.N, grid)
    p = models.exponent_for(grid, seed, path_index, times_all)
    forcing = models.forcing_field(grid, seed, path_index)
    noise = models.noise
    system = GalerkinSystem(basis, p, models.mu, forcing, noise, config.dealias)

    K = noise.K if noise is not None else 0
    if wiener is None:
        wiener = wiener_increments(K, config.dt, steps, seed, path_index)
    elif wiener.steps != steps or wiener.K != K or abs(wiener.dt - config.dt) > 1e-15 * config.dt:
        raise ValueError("supplied Wiener path does not match the solver configuration")

    if C0 is None:
        C0 = project_initial(models.initial_field(grid, seed, path_index), basis)
    state = GalerkinState(0.0, np.array(C0, dtype=float))
    limit = config.blowup_factor * (1.0 + float(np.linalg.norm(C0)))

    p_lo, p_hi = models.exponent_bounds()
    acc = _Accumulator(grid, p_lo, p_hi, path_index, seed) if config.diagnostics else None
    rec_times, rec_C = [], []
    dissipation = np.empty(steps)
    inv = {"max_div": 0.0, "max_conv_power": 0.0, "max_parseval": 0.0}

    for j in range(steps + 1):
        parts = system.drift_parts(state.t, state.C) if j < steps or config.check_invariants else None
        if config.check_invariants:
            _update_invariants(inv, system, state.C, parts)
        if j % config.cadence == 0 or j == steps:
            rec_times.append(state.t)
            rec_C.append(state.C.copy())
            if acc is not None:
                acc.add(state.t, basis.synthesize_hat(state.C), system.p_at(state.t))
        if j == steps:
            break
        dissipation[j] = parts.dissipation
        state = step(system, state, config.dt, wiener.increments[j], config.integrator, parts)
        nrm = float(np.linalg.norm(state.C))
        if not np.all(np.isfinite(state.C)) or nrm > limit:
            raise BlowUpError(
                f"state left the admissible range at step {state.step} (t = {state.t:.6g}, |C| = {nrm:.3e})",
                state.t, state.step, state.C)
        state.t = times_all[state.step]

    return Trajectory(config, system, np.array(rec_times), np.array(rec_C), wiener, seed,
                      path_index, forcing, dissipation, inv,
                      acc.records if acc is not None else [])


def _update_invariants(inv: dict, system: GalerkinSystem, C: np.ndarray, parts: DriftParts) -> None:
    g = system.grid
    v_hat = system.basis.synthesize_hat(C)
    div = fft_inverse(div_hat(v_hat, g), g)
    inv["max_div"] = max(inv["max_div"], float(np.abs(div).max()))
    c2 = float(C @ C)
    inv["max_conv_power"] = max(inv["max_conv_power"],
                                abs(float(parts.convection @ C)) / (1.0 + c2**1.5))
    l2 = float(np.mean(np.sum(parts.v**2, axis=0)))
    inv["max_parseval"] = max(inv["max_parseval"], abs(l2 - c2))


# --- ensembles --------------------------------------------------------------

@dataclass
class EnsembleResult:
    M: int
    seed: object
    summaries: list
    stats: dict
    records: list

    def stat(self, name: str) -> tuple[float, float, float]:
        return self.stats[name]


def _worker(args):
    config, models, seed, path_index, keep_records = args
    traj = simulate_path(config, models, seed, path_index)
    return path_index, traj.summary(), (traj.diagnostics if keep_records else [])


def max_workers() -> int:
    env = os.environ.get("ERSIM_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cpus))
        except ValueError:
            raise ValueError(f"ERSIM_THREADS must be an integer, got {env!r}") from None
    return cpus


def simulate_ensemble(config: SolverConfig, models, M: int, seed=0, workers: int | None = None,
                      keep_records: bool = False) -> EnsembleResult:
    """M independent paths; path i uses the counter-based streams keyed by (seed, i).

    ``stats`` maps each scalar summary to (mean, sample variance, 95% half-width).
    Results do not depend on the number of workers.
    """
    if M < 2:
        raise ValueError("an ensemble needs M >= 2 paths")
    workers = max_workers() if workers is None else max(1, workers)
    jobs = [(config, models, seed, i, keep_records) for i in range(M)]
    if workers == 1:
        results = [_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_worker, jobs))
    results.sort(key=lambda r: r[0])
    summaries = [r[1] for r in results]
    records = [rec for r in results for rec in r[2]]
    stats = {}
    for key, val in summaries[0].items():
        if np.ndim(val) != 0:
            continue
        x = np.array([s[key] for s in summaries], dtype=float)
        var = float(np.var(x, ddof=1))
        stats[key] = (float(np.mean(x)), var, 1.96 * math.sqrt(var / M))
    return EnsembleResult(M, seed, summaries, stats, records)
