"""Truthful reverse auctions for relay selection in D2D-underlay cellular cells."""
from .channel import CellConfig, ConfigError, Scenario, build_scenario, sample_scenario
from .matching import WeightedBipartite, optimal_maximal_matching
from .mechanisms import (AuctionOutcome, BidProfile, InsufficientCompetition, MechanismKind,
                         MechanismSpec, run_mechanism)
from .relaying import AF, ALL_SCHEMES, DF, NORMAL, SELECTION, Scheme

__version__ = "0.1.0"

__all__ = [
    "AF", "ALL_SCHEMES", "AuctionOutcome", "BidProfile", "CellConfig", "ConfigError", "DF",
    "InsufficientCompetition", "MechanismKind", "MechanismSpec", "NORMAL", "SELECTION",
    "Scenario", "Scheme", "WeightedBipartite", "build_scenario", "optimal_maximal_matching",
    "run_mechanism", "sample_scenario",
]
