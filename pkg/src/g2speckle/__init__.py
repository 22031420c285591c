"""Photon correlations of light scattered by independent two-level emitters."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .correlations import (
    DriveParams,
    SteadyState,
    correlation_bruteforce,
    g1,
    g2_closed_form,
    gm_leading_order,
)
from .geometry import EmitterConfig, generate_chain, generate_lattice, load_config, sample_ball, save_config
from .structure import (
    ScatteringVector,
    enumerate_partitions,
    generalized_structure_factor,
    structure_factor,
)

__all__ = [
    "BACKEND",
    "DriveParams",
    "EmitterConfig",
    "ScatteringVector",
    "SteadyState",
    "correlation_bruteforce",
    "enumerate_partitions",
    "g1",
    "g2_closed_form",
    "generalized_structure_factor",
    "generate_chain",
    "generate_lattice",
    "gm_leading_order",
    "load_config",
    "sample_ball",
    "save_config",
    "structure_factor",
    "__version__",
]
