"""Adaptive compressive wideband spectrum sensing.

Sub-Nyquist acquisition with an online halting rule: measurements arrive
in mini time slots, a sparse spectral estimate is recovered after each,
and acquisition stops once a held-out verification statistic settles at
the noise level.  Energy detection and throughput models quantify what
the saved sensing time buys.
"""

from .acquisition import AcquisitionState, MeasurementEnsemble, build_ensemble
from .config import (
    ConfigError,
    RandomSubbands,
    ScenarioConfig,
    SubbandSpec,
    draw_subbands,
    load_config,
    load_preset,
    realize,
)
from .detection import DetectionResult, confusion, energy_detect, subchannel_energies
from .orchestrator import SensingOutcome, adaptive_sense
from .recovery import (
    SolverSettings,
    SpectralEstimate,
    cross_validated_estimate,
    recover,
    refine_on_support,
)
from .signal_model import NyquistSignal, ground_truth_occupancy, synthesize
from .throughput import LinkModel, adaptive_throughput, baseline_throughput
from .validation import (
    VerificationRecord,
    bernstein_bound,
    halting_check,
    verification_parameter,
)

__version__ = "0.1.0"

__all__ = [
    "AcquisitionState",
    "ConfigError",
    "DetectionResult",
    "LinkModel",
    "MeasurementEnsemble",
    "NyquistSignal",
    "RandomSubbands",
    "ScenarioConfig",
    "SensingOutcome",
    "SolverSettings",
    "SpectralEstimate",
    "SubbandSpec",
    "VerificationRecord",
    "adaptive_sense",
    "adaptive_throughput",
    "baseline_throughput",
    "bernstein_bound",
    "build_ensemble",
    "confusion",
    "cross_validated_estimate",
    "draw_subbands",
    "energy_detect",
    "ground_truth_occupancy",
    "halting_check",
    "load_config",
    "load_preset",
    "realize",
    "recover",
    "refine_on_support",
    "subchannel_energies",
    "synthesize",
    "verification_parameter",
]
