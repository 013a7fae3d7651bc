"""Deterministic simulator and verification toolkit for the parking process.

Cars and parking spots are scattered on a finite lattice; cars perform
synchronous random walks and annihilate with vacant spots on arrival.
The package provides the simulation engine, exact small-instance oracles,
observable statistics, and a reproducible experiment CLI.
"""

from parkproc.topology import (
    Boundary,
    Family,
    Topology,
    TopologySpec,
    build_topology,
)
from parkproc.randomness import Purpose, RandomnessSource
from parkproc.engine import (
    InitialConfig,
    SimSeries,
    SimState,
    couple_run,
    init_state,
    run,
    run_to_absorption,
    sample_initial,
    snapshot,
    step,
    visit_identity_check,
)

__all__ = [
    "Boundary",
    "Family",
    "Topology",
    "TopologySpec",
    "build_topology",
    "Purpose",
    "RandomnessSource",
    "InitialConfig",
    "SimSeries",
    "SimState",
    "couple_run",
    "init_state",
    "run",
    "run_to_absorption",
    "sample_initial",
    "snapshot",
    "step",
    "visit_identity_check",
]

__version__ = "0.1.0"
