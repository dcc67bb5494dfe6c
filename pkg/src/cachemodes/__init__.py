"""Operating-mode probabilities of cache-enabled full-duplex D2D networks.

Users cache one file each and request one file each; every user then falls
into one of six operating modes (SR, SR-HDTX, FDTR, HDTX, HDRX, HO). This
package computes the mode probabilities analytically and by simulation for
deterministic (user ``i`` caches file ``i``) and Zipf-random caching.
"""
from .deterministic import bfd_tnfd_split_det, hit_probability_det, mode_probabilities_det
from .distributions import CachingDist, NetworkConfig, PopularityDist, ZipfDist, sample_index, zipf_pmf
from .errors import CacheModesError, CapacityError, ConfigError, InvalidArgument, PolicyViolation
from .experiments import (
    SweepSpec,
    compare_policies,
    evaluate,
    optimize_gamma_c,
    run_preset,
    run_sweep,
    validate,
)
from .metrics import AggregateMetrics, Pmf, aggregate_metrics, binomial_pmf, mode_pmf
from .modes import MODE_NAMES, Engine, ModeProbabilities, Policy
from .simulator import ModeLabel, Placement, RequestVector, SimEstimate, classify_user, empirical_pmf, run_trials
from .stochastic import decode_permutation, mode_probabilities_exact, mode_probabilities_fast

__version__ = "0.1.0"

__all__ = [
    "AggregateMetrics", "CacheModesError", "CachingDist", "CapacityError", "ConfigError", "Engine",
    "InvalidArgument", "MODE_NAMES", "ModeLabel", "ModeProbabilities", "NetworkConfig", "Placement", "Pmf",
    "Policy", "PolicyViolation", "PopularityDist", "RequestVector", "SimEstimate", "SweepSpec", "ZipfDist",
    "aggregate_metrics", "bfd_tnfd_split_det", "binomial_pmf", "classify_user", "compare_policies",
    "decode_permutation", "empirical_pmf", "evaluate", "hit_probability_det", "mode_pmf",
    "mode_probabilities_det", "mode_probabilities_exact", "mode_probabilities_fast", "optimize_gamma_c",
    "run_preset", "run_sweep", "run_trials", "sample_index", "validate", "zipf_pmf",
]
