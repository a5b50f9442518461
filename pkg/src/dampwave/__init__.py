"""Numerical laboratory for damped quasilinear wave systems."""

from .decay import DecayFit, HypothesisReport, classify_data, fit_decay, verify_rates
from .energetics import FunctionalParams, Ledger, Snapshot, energy, higher_energy, ledger
from .errors import (
    BlowUpError,
    ConfigError,
    DampwaveError,
    DerivativeOrderError,
    DomainError,
    FitError,
    HypothesisError,
    ParameterError,
    ShapeError,
    StepSizeError,
)
from .grid import Field, Grid
from .model import DampingSpec, MultiplierSpec, NonlinearTensor, random_tensor, symmetrize
from .sampling import Profile, gaussian_profile, sample_profile
from .solver import InitialData, RunConfig, State, Trajectory, rescaling_roundtrip, simulate, step

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "ConfigError",
    "DampingSpec",
    "DampwaveError",
    "DecayFit",
    "DerivativeOrderError",
    "DomainError",
    "Field",
    "FitError",
    "FunctionalParams",
    "Grid",
    "HypothesisError",
    "HypothesisReport",
    "InitialData",
    "Ledger",
    "MultiplierSpec",
    "NonlinearTensor",
    "ParameterError",
    "Profile",
    "RunConfig",
    "ShapeError",
    "Snapshot",
    "State",
    "StepSizeError",
    "Trajectory",
    "classify_data",
    "energy",
    "fit_decay",
    "gaussian_profile",
    "higher_energy",
    "ledger",
    "random_tensor",
    "rescaling_roundtrip",
    "sample_profile",
    "simulate",
    "step",
    "symmetrize",
    "verify_rates",
]
