from .model import (
    FourLevelSystem,
    LaserPair,
    build_generator,
    build_generator_parts,
    collapse_operators,
    hamiltonian_parts,
)
from .ops import (
    SteadyState,
    fluorescence,
    pump_probe_scan,
    single_laser_scan,
    steady_state,
    two_colour_map,
)
from .solver import HAVE_KERNEL, active_backend, set_backend

__all__ = [
    "FourLevelSystem",
    "LaserPair",
    "SteadyState",
    "HAVE_KERNEL",
    "active_backend",
    "build_generator",
    "build_generator_parts",
    "collapse_operators",
    "fluorescence",
    "hamiltonian_parts",
    "pump_probe_scan",
    "set_backend",
    "single_laser_scan",
    "steady_state",
    "two_colour_map",
]
