"""Stochastic electrorheological fluid simulator on the flat torus.

Galerkin-spectral discretization of the stochastic power-law fluid equations
with a variable, possibly random exponent p(omega, t, x).
"""
from .spectral import Grid
from .constitutive import StressParams, stress, f_p
from .exponent import ExponentBounds, ExponentField, sample_exponent, check_admissibility
from .galerkin import GalerkinBasis, build_basis, project_initial
from .noise import NoiseModel, wiener_increments
from .problem import Models, TaylorGreen, RandomDivFree, FourierForcing, ExponentSpec
from .solver import (SolverConfig, GalerkinSystem, simulate_path, simulate_ensemble,
                     BlowUpError)

__version__ = "0.1.0"

__all__ = [
    "Grid", "StressParams", "stress", "f_p", "ExponentBounds", "ExponentField",
    "sample_exponent", "check_admissibility", "GalerkinBasis", "build_basis",
    "project_initial", "NoiseModel", "wiener_increments", "Models", "TaylorGreen",
    "RandomDivFree", "FourierForcing", "ExponentSpec", "SolverConfig", "GalerkinSystem",
    "simulate_path", "simulate_ensemble", "BlowUpError",
]
