"""Finite-range Ising ferromagnets: cluster Monte Carlo, transfer matrices and OZ fits."""

from ozlab.ising.fit import FitResult, OzFit, fit_points, oz_fit
from ozlab.ising.measure import CorrelationEstimate, measure_correlation
from ozlab.ising.model import IsingModel, SpinLattice
from ozlab.ising.transfer import (
    StripResult,
    aitken,
    exact_1d,
    strip_correlation,
    strip_energy,
    strip_sequence,
    strip_transfer_matrix,
    torus_correlation,
)
from ozlab.ising.wolff import SampleStream, spawn_seeds, wolff_sample

__all__ = [
    "CorrelationEstimate", "FitResult", "IsingModel", "OzFit", "SampleStream", "SpinLattice",
    "StripResult", "aitken", "exact_1d", "fit_points", "measure_correlation", "oz_fit", "spawn_seeds",
    "strip_correlation", "strip_energy", "strip_sequence", "strip_transfer_matrix",
    "torus_correlation", "wolff_sample",
]
