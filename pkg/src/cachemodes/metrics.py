"""Aggregate metrics (HD/FD/TX/RX) and binomial PMFs of per-mode node counts."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .modes import ModeProbabilities

# Below this N binomial coefficients are exact integers; above it log-gamma.
EXACT_COMB_LIMIT = 60

AGGREGATES = ("HD", "FD", "TX", "RX")


@dataclass(frozen=True)
class AggregateMetrics:
    p_hd: float
    p_fd: float
    p_tx: float
    p_rx: float

    def get(self, metric: str) -> float:
        key = "p_" + str(metric).strip().lower()
        if not hasattr(self, key):
            raise InvalidArgument(f"unknown aggregate metric {metric!r}; expected one of {AGGREGATES}")
        return getattr(self, key)

    def as_dict(self) -> dict:
        return {"hd": self.p_hd, "fd": self.p_fd, "tx": self.p_tx, "rx": self.p_rx}


def aggregate_metrics(modes: ModeProbabilities) -> AggregateMetrics:
    return AggregateMetrics(
        p_hd=modes.p_sr_hdtx + modes.p_hdrx + modes.p_hdtx,
        p_fd=modes.p_fdtr,
        p_tx=modes.p_sr_hdtx + modes.p_hdtx + modes.p_fdtr,
        p_rx=modes.p_fdtr + modes.p_hdrx,
    )


@dataclass(frozen=True, eq=False)
class Pmf:
    """Distribution of a node count over the support ``0..N``."""

    masses: np.ndarray
    mean: float
    variance: float

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.masses.size)

    @property
    def num_users(self) -> int:
        return self.masses.size - 1

    def total_variation(self, other: "Pmf") -> float:
        if other.masses.size != self.masses.size:
            raise InvalidArgument("PMFs have different supports")
        return 0.5 * float(np.abs(self.masses - other.masses).sum())


def pmf_from_masses(masses) -> Pmf:
    masses = np.asarray(masses, dtype=np.float64)
    k = np.arange(masses.size)
    mean = float(np.dot(k, masses))
    variance = float(np.dot((k - mean) ** 2, masses))
    masses.setflags(write=False)
    return Pmf(masses, mean, variance)


def _check_prob(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidArgument(f"probability must lie in [0, 1], got {p}")
    return p


def binomial_pmf(num_users: int, count: int, prob: float) -> float:
    """``C(N, n) p**n (1-p)**(N-n)``."""
    if num_users < 0 or count < 0:
        raise InvalidArgument("N and n must be non-negative")
    if count > num_users:
        raise InvalidArgument(f"count {count} exceeds N={num_users}")
    p = _check_prob(prob)
    # 0**0 == 1 covers the degenerate endpoints exactly.
    if p == 0.0 or p == 1.0:
        return float(p**count * (1.0 - p) ** (num_users - count))
    if num_users <= EXACT_COMB_LIMIT:
        return math.comb(num_users, count) * p**count * (1.0 - p) ** (num_users - count)
    log_comb = math.lgamma(num_users + 1) - math.lgamma(count + 1) - math.lgamma(num_users - count + 1)
    return math.exp(log_comb + count * math.log(p) + (num_users - count) * math.log1p(-p))


def mode_pmf(num_users: int, prob: float) -> Pmf:
    """Binomial PMF of the number of users (out of N) operating in a mode."""
    if num_users < 1:
        raise InvalidArgument(f"N must be >= 1, got {num_users}")
    p = _check_prob(prob)
    masses = np.array([binomial_pmf(num_users, n, p) for n in range(num_users + 1)])
    return pmf_from_masses(masses)


def mode_probability(modes: ModeProbabilities, mode: str) -> float:
    """Probability of a single mode or aggregate by name (``"HDRX"``, ``"TX"``...)."""
    key = str(mode).strip().upper().replace("-", "_")
    aggregates = aggregate_metrics(modes)
    table = {
        "SR": modes.p_sr,
        "SR_HDTX": modes.p_sr_hdtx,
        "FDTR": modes.p_fdtr,
        "HDTX": modes.p_hdtx,
        "HDRX": modes.p_hdrx,
        "HO": modes.p_ho,
        "BFD": modes.p_bfd,
        "TNFD": modes.p_tnfd,
        "HD": aggregates.p_hd,
        "FD": aggregates.p_fd,
        "TX": aggregates.p_tx,
        "RX": aggregates.p_rx,
    }
    if key not in table:
        raise InvalidArgument(f"unknown mode {mode!r}")
    if table[key] is None:
        raise InvalidArgument(f"{key} split is not available for {modes.provenance.value} results")
    return table[key]
