"""Joint detection of coordinated bots in retweet graphs by minimum cut."""

__version__ = "0.1.0"

from .analysis import hashtag_diff, ks_pvalue, ks_statistic, retweet_rates, roc_curve
from .energy import EnergyParams, base_link_energy, configuration_energy, validate
from .graph import BOT, HUMAN, GroundTruth, InteractionGraph, ingest_edges, ingest_labels
from .mincut import build_energy_graph, detect, max_flow, min_marginals
from .synth import SynthConfig, generate

__all__ = [
    "BOT",
    "HUMAN",
    "EnergyParams",
    "GroundTruth",
    "InteractionGraph",
    "SynthConfig",
    "base_link_energy",
    "build_energy_graph",
    "configuration_energy",
    "detect",
    "generate",
    "hashtag_diff",
    "ingest_edges",
    "ingest_labels",
    "ks_pvalue",
    "ks_statistic",
    "max_flow",
    "min_marginals",
    "retweet_rates",
    "roc_curve",
    "validate",
]
