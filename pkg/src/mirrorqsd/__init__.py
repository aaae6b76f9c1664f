"""Contextual advantage in mirror-symmetric qubit state discrimination.

Optimal minimum-error and maximum-confidence measurements, their
noncontextual bounds, a quantum-walk compiler for the measurements,
half-wave-plate settings, and a shot-noise emulator of the experiment.
"""

__version__ = "0.1.0"

from .model import Ensemble, Povm, ensemble_average, mirror_ensemble, outcome_probabilities, validate_povm
from .strategies import (
    MuConvention,
    Strategy,
    bounds_report,
    mcd_confidence_quantum,
    mcd_povm,
    med_povm,
    med_success_quantum,
)

__all__ = [
    "Ensemble",
    "MuConvention",
    "Povm",
    "Strategy",
    "bounds_report",
    "ensemble_average",
    "mcd_confidence_quantum",
    "mcd_povm",
    "med_povm",
    "med_success_quantum",
    "mirror_ensemble",
    "outcome_probabilities",
    "validate_povm",
]
