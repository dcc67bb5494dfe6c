"""Monte Carlo estimation of operating-mode probabilities.

Each trial draws one placement and one request vector, labels every user
with exactly one mode and accumulates per-mode totals plus the histogram of
per-trial node counts. Trials are grouped into fixed-size blocks; block
``b`` draws from a stream seeded by ``(seed, b)``, so the output depends
only on ``(config, trials, seed)`` and never on how blocks are spread
across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .distributions import CachingDist, NetworkConfig, PopularityDist, caching_dist, popularity
from .errors import InvalidArgument, PolicyViolation
from .metrics import Pmf, pmf_from_masses
from .modes import MODE_NAMES, Engine, ModeProbabilities, Policy


class ModeLabel(str, Enum):
    SR = "SR"
    SR_HDTX = "SR_HDTX"
    BFD = "BFD"
    TNFD = "TNFD"
    HDTX = "HDTX"
    HDRX = "HDRX"
    HO = "HO"


LABELS = tuple(ModeLabel)
_CODE = {label: code for code, label in enumerate(LABELS)}
SR, SR_HDTX, BFD, TNFD, HDTX, HDRX, HO = range(len(LABELS))

# Per-trial count columns kept as histograms: the seven labels, then the
# FDTR union and the four aggregates of (HD, FD, TX, RX).
GROUPS = {
    "SR": (SR,),
    "SR_HDTX": (SR_HDTX,),
    "BFD": (BFD,),
    "TNFD": (TNFD,),
    "HDTX": (HDTX,),
    "HDRX": (HDRX,),
    "HO": (HO,),
    "FDTR": (BFD, TNFD),
    "HD": (SR_HDTX, HDRX, HDTX),
    "FD": (BFD, TNFD),
    "TX": (SR_HDTX, HDTX, BFD, TNFD),
    "RX": (BFD, TNFD, HDRX),
}

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class Placement:
    cached: tuple

    def __post_init__(self):
        object.__setattr__(self, "cached", tuple(int(c) for c in self.cached))


@dataclass(frozen=True)
class RequestVector:
    requested: tuple

    def __post_init__(self):
        object.__setattr__(self, "requested", tuple(int(c) for c in self.requested))


@dataclass(frozen=True, eq=False)
class SimEstimate:
    config: NetworkConfig
    mode_probs: ModeProbabilities
    std_errors: dict
    label_counts: dict
    counts_histograms: dict = field(repr=False)
    trials: int
    seed: int

    def __eq__(self, other):
        if not isinstance(other, SimEstimate):
            return NotImplemented
        return (
            self.config == other.config
            and self.mode_probs == other.mode_probs
            and self.std_errors == other.std_errors
            and self.label_counts == other.label_counts
            and self.trials == other.trials
            and self.seed == other.seed
            and self.counts_histograms.keys() == other.counts_histograms.keys()
            and all(np.array_equal(self.counts_histograms[k], other.counts_histograms[k]) for k in self.counts_histograms)
        )


def sample_placement(config: NetworkConfig, cache: CachingDist, rng: np.random.Generator) -> Placement:
    if config.policy is Policy.DETERMINISTIC:
        if config.num_users > config.library_size:
            raise PolicyViolation("deterministic caching needs N <= m")
        return Placement(range(1, config.num_users + 1))
    return Placement(cache.sample(rng, config.num_users))


def sample_requests(config: NetworkConfig, pop: PopularityDist, rng: np.random.Generator) -> RequestVector:
    return RequestVector(pop.sample(rng, config.num_users))


def classify_user(user: int, placement: Placement, requests: RequestVector) -> ModeLabel:
    """Mode of user ``user`` (1-based) given everybody's cache and request.

    Reference implementation written straight from the mode definitions;
    the batch classifier used by :func:`run_trials` is tested against it.
    """
    cached, requested = placement.cached, requests.requested
    if len(cached) != len(requested):
        raise InvalidArgument("placement and requests differ in length")
    k = user - 1
    others = [t for t in range(len(cached)) if t != k]
    self_hit = requested[k] == cached[k]
    demand = any(requested[t] == cached[k] for t in others)
    if self_hit:
        return ModeLabel.SR_HDTX if demand else ModeLabel.SR
    can_receive = any(cached[t] == requested[k] for t in others)
    if can_receive and demand:
        mutual = any(cached[t] == requested[k] and requested[t] == cached[k] for t in others)
        return ModeLabel.BFD if mutual else ModeLabel.TNFD
    if can_receive:
        return ModeLabel.HDRX
    return ModeLabel.HDTX if demand else ModeLabel.HO


def classify_batch(cached: np.ndarray, requested: np.ndarray, library_size: int) -> np.ndarray:
    """Label codes for a ``(trials, N)`` batch of 0-based caches and requests.

    Occurrence counts per (trial, content) make the demand and receive tests
    table lookups; the mutual-partner search runs only on full-duplex
    candidates, since any BFD partner is itself a candidate.
    """
    trials, n = requested.shape
    m = library_size
    offset = (np.arange(trials, dtype=np.int64) * m)[:, None]
    ck = (cached + offset).ravel()
    rk = (requested + offset).ravel()
    n_req = np.bincount(rk, minlength=trials * m)
    n_cache = np.bincount(ck, minlength=trials * m)
    self_hit = ck == rk
    demand = n_req[ck] > self_hit
    receive = n_cache[rk] > self_hit

    labels = np.full(ck.size, HO, dtype=np.int8)
    labels[~self_hit & ~receive & demand] = HDTX
    labels[~self_hit & receive & ~demand] = HDRX
    labels[self_hit & demand] = SR_HDTX
    labels[self_hit & ~demand] = SR
    fd = np.flatnonzero(~self_hit & receive & demand)
    if fd.size:
        # Pair key (trial, cache, request); a partner has the key (trial, request, cache).
        keys = np.sort(ck[fd] * m + (rk[fd] % m))
        wanted = rk[fd] * m + (ck[fd] % m)
        pos = np.minimum(np.searchsorted(keys, wanted), keys.size - 1)
        labels[fd] = np.where(keys[pos] == wanted, BFD, TNFD)
    return labels.reshape(trials, n)


def block_size(config: NetworkConfig) -> int:
    """Trials per random-stream block; a function of the configuration only."""
    by_users = (1 << 20) // config.num_users
    by_table = (1 << 22) // config.library_size
    return max(1, min(4096, by_users, by_table))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_block(args):
    config, trials, seed, block = args
    pop, cache = popularity(config), caching_dist(config)
    rng = _block_rng(seed, block)
    n, m = config.num_users, config.library_size
    if config.policy is Policy.DETERMINISTIC:
        cached = np.broadcast_to(np.arange(n, dtype=np.int64), (trials, n))
    else:
        cached = cache.sample(rng, (trials, n)) - 1
    requested = pop.sample(rng, (trials, n)) - 1
    labels = classify_batch(cached, requested, m)

    k = len(LABELS)
    slot = (np.arange(trials, dtype=np.int64) * k)[:, None] + labels
    per_trial = np.bincount(slot.ravel(), minlength=trials * k).reshape(trials, k)
    totals = per_trial.sum(axis=0)
    hists = {}
    for name, codes in GROUPS.items():
        counts = per_trial[:, list(codes)].sum(axis=1)
        hists[name] = np.bincount(counts, minlength=n + 1)
    return totals, hists


def _blocks(config: NetworkConfig, trials: int, seed: int):
    size = block_size(config)
    return [
        (config, min(size, trials - start), seed, b)
        for b, start in enumerate(range(0, trials, size))
    ]


def run_trials(config: NetworkConfig, trials: int, seed: int = 42, workers: int = 1) -> SimEstimate:
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise InvalidArgument(f"trials must be a positive integer, got {trials!r}")
    if not 0 <= int(seed) <= MAX_SEED:
        raise InvalidArgument(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    trials, seed = int(trials), int(seed)
    tasks = _blocks(config, trials, seed)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        parts = [_run_block(t) for t in tasks]

    n = config.num_users
    totals = np.zeros(len(LABELS), dtype=np.int64)
    hists = {name: np.zeros(n + 1, dtype=np.int64) for name in GROUPS}
    for block_totals, block_hists in parts:
        totals += block_totals
        for name in GROUPS:
            hists[name] += block_hists[name]
    return _estimate(config, trials, seed, totals, hists)


def _estimate(config, trials, seed, totals, hists) -> SimEstimate:
    users = trials * config.num_users
    counts = {label.value: int(totals[_CODE[label]]) for label in LABELS}
    fdtr = counts["BFD"] + counts["TNFD"]
    by_mode = {
        "sr": counts["SR"],
        "sr_hdtx": counts["SR_HDTX"],
        "fdtr": fdtr,
        "hdtx": counts["HDTX"],
        "hdrx": counts["HDRX"],
        "ho": counts["HO"],
    }
    probs = {name: by_mode[name] / users for name in MODE_NAMES}
    modes = ModeProbabilities(
        **{"p_" + k: v for k, v in probs.items()},
        policy=config.policy,
        provenance=Engine.MONTE_CARLO,
        p_bfd=counts["BFD"] / users,
        p_tnfd=counts["TNFD"] / users,
    )
    se = {name: standard_error(p, users) for name, p in probs.items()}
    se["bfd"] = standard_error(modes.p_bfd, users)
    se["tnfd"] = standard_error(modes.p_tnfd, users)
    return SimEstimate(
        config=config,
        mode_probs=modes,
        std_errors=se,
        label_counts=counts,
        counts_histograms=hists,
        trials=trials,
        seed=seed,
    )


def standard_error(p: float, samples: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / samples)


_PMF_ALIASES = {
    "SR-HDTX": "SR_HDTX",
    "SRHDTX": "SR_HDTX",
}


def normalize_mode_name(mode) -> str:
    text = getattr(mode, "value", mode)
    text = str(text).strip().upper().replace(" ", "_")
    text = _PMF_ALIASES.get(text, text.replace("-", "_"))
    if text not in GROUPS:
        raise InvalidArgument(f"unknown mode {mode!r}; expected one of {', '.join(GROUPS)}")
    return text


def empirical_pmf(estimate: SimEstimate, mode) -> Pmf:
    """Normalized histogram of the per-trial number of users in ``mode``."""
    name = normalize_mode_name(mode)
    hist = estimate.counts_histograms[name]
    return pmf_from_masses(hist / hist.sum())


def run_network(placement: Placement, requests: RequestVector) -> list[ModeLabel]:
    """Label every user of one realization with the reference classifier."""
    return [classify_user(k, placement, requests) for k in range(1, len(placement.cached) + 1)]


def label_of(code: int) -> ModeLabel:
    return LABELS[code]


def codes(labels: Sequence[ModeLabel]) -> list[int]:
    return [_CODE[label] for label in labels]
