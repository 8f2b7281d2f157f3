"""Pseudo-spectral Boussinesq solver with Littlewood-Paley diagnostics."""
from .corpus import CorpusSpec
from .inequalities import run_corpus
from .littlewood_paley import BesovSpec, LPBank, besov_norm, build_bank
from .monitor import MonitorReport, NormSample, build_report
from .solver import BlowUpError, SimState, SolverConfig, simulate
from .spectral import Grid, SpectralField, forward_transform, to_physical

__version__ = "0.1.0"

__all__ = [
    "BesovSpec",
    "BlowUpError",
    "CorpusSpec",
    "Grid",
    "LPBank",
    "MonitorReport",
    "NormSample",
    "SimState",
    "SolverConfig",
    "SpectralField",
    "besov_norm",
    "build_bank",
    "build_report",
    "forward_transform",
    "run_corpus",
    "simulate",
    "to_physical",
]
