"""Simulation suite for velocity-comb atomic frequency combs in hot vapors.

The package prepares an atomic frequency comb in a Doppler-broadened
three-level gas with trains of pump/dump pulses, measures the comb's
figures of merit, and propagates a single-photon envelope through the
prepared medium to model storage and retrieval.
"""

__version__ = "0.1.0"

from .model import (
    AfcMetrics,
    AtomicSystem,
    GasParameters,
    VelocityGrid,
    afc_metrics_analytic,
    design_conditions,
    doppler_detunings,
    maxwell_boltzmann,
    v_two_photon,
)
from .pulses import PulseTrain, check_adiabaticity, dark_state, mixing_angle, ofc_spectrum
from .bloch import VelocityComb, evolve, velocity_comb
from .comb import AfcProfile, PeakSet, detect_peaks, fit_comb_model, vc_to_afc
from .memory import MemoryResult, StorageConfig, analytic_efficiency, input_photon, propagate
from .stirapoz import OzCurves, oz_curves, oz_map, pap_width_from_stirap, stirap_widths

__all__ = [
    "AfcMetrics",
    "AfcProfile",
    "AtomicSystem",
    "GasParameters",
    "MemoryResult",
    "OzCurves",
    "PeakSet",
    "PulseTrain",
    "StorageConfig",
    "VelocityComb",
    "VelocityGrid",
    "afc_metrics_analytic",
    "analytic_efficiency",
    "check_adiabaticity",
    "dark_state",
    "design_conditions",
    "detect_peaks",
    "doppler_detunings",
    "evolve",
    "fit_comb_model",
    "input_photon",
    "maxwell_boltzmann",
    "mixing_angle",
    "ofc_spectrum",
    "oz_curves",
    "oz_map",
    "pap_width_from_stirap",
    "propagate",
    "stirap_widths",
    "v_two_photon",
    "vc_to_afc",
    "velocity_comb",
]
