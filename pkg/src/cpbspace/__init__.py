"""Entanglement, mixedness and nonlocality of two qubits in a common Lorentzian reservoir."""

from .dynamics import PerfectCavityParams, SimParams, evolve, rho_pp_analytic
from .mems import mems_cpb, mems_state
from .quantifiers import CPBTriplet, Region, XState, cpb_triplet, validate_x_state
from .trajectory import TrajectoryRecord, detect_branches, sample_trajectory

__version__ = "0.1.0"

__all__ = [
    "CPBTriplet", "PerfectCavityParams", "Region", "SimParams", "TrajectoryRecord", "XState",
    "cpb_triplet", "detect_branches", "evolve", "mems_cpb", "mems_state",
    "rho_pp_analytic", "sample_trajectory", "validate_x_state",
]
