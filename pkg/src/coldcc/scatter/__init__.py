"""Scattering layer: propagation, matching, observables, scans."""
from .grid import PropagationGrid
from .propagate import ScatteringResult, match, propagate
from .observables import (rate_constant, scattering_length_from_kmats,
                          sigma_m_resolved, sigma_state_to_state)
from .bound import count_bound_states
from .kernels import backend_name

__all__ = [
    "PropagationGrid", "ScatteringResult", "match", "propagate",
    "rate_constant", "scattering_length_from_kmats", "sigma_m_resolved",
    "sigma_state_to_state", "count_bound_states", "backend_name",
]
