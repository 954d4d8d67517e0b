"""Time-bin qubit teleportation and memoryless quantum-relay key rates."""

from .fock import BeamSplitter, Delay, ModeId, PhaseShift, StateVector
from .rates import DetectorModel, LinkParams, RateReport, max_distance, optimal_n, rates_direct, rates_relay, transmission
from .teleport import NoiseKnobs, TeleportReport, TimeBinQubit, fit_noise_knobs, mean_fidelity_decomposed

__version__ = "0.1.0"

__all__ = [
    "BeamSplitter",
    "Delay",
    "DetectorModel",
    "LinkParams",
    "ModeId",
    "NoiseKnobs",
    "PhaseShift",
    "RateReport",
    "StateVector",
    "TeleportReport",
    "TimeBinQubit",
    "fit_noise_knobs",
    "max_distance",
    "mean_fidelity_decomposed",
    "optimal_n",
    "rates_direct",
    "rates_relay",
    "transmission",
]
