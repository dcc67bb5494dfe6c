"""Closed-form mode probabilities under deterministic caching.

User ``k`` caches content ``k`` for ``k = 1..N``. For the tagged user the
request side has three outcomes (own content, another user's content, a
content nobody holds) and the demand side two (some other user requests
the tagged user's content or nobody does). The two sides involve different
users' requests, so they multiply; averaging over the uniformly chosen user
gives the six mode probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import PopularityDist
from .errors import InvalidArgument, PolicyViolation
from .modes import Engine, ModeProbabilities, Policy


@dataclass(frozen=True)
class HitProbability:
    """Probability that a random request falls on one of the N cached contents."""

    value: float


def _cached_popularity(pop: PopularityDist, num_users: int) -> np.ndarray:
    if num_users < 1:
        raise InvalidArgument(f"num_users must be >= 1, got {num_users}")
    if num_users > pop.library_size:
        raise PolicyViolation(
            f"deterministic caching needs N <= m (N={num_users}, m={pop.library_size})"
        )
    return pop.masses[:num_users]


def hit_probability_det(pop: PopularityDist, num_users: int) -> HitProbability:
    rho = _cached_popularity(pop, num_users)
    return HitProbability(float(rho.sum()))


def _factors(pop: PopularityDist, num_users: int):
    rho = _cached_popularity(pop, num_users)
    hit = float(rho.sum())
    no_demand = (1.0 - rho) ** (num_users - 1)
    return rho, hit, no_demand, 1.0 - no_demand


def bfd_tnfd_split_det(pop: PopularityDist, num_users: int) -> tuple[float, float]:
    """Split the full-duplex transceiver probability into (BFD, TNFD).

    BFD: the tagged user's transmitter asks for the tagged user's content,
    which happens with probability rho_k. TNFD takes the rest of the demand
    mass, ``1 - rho_k - (1 - rho_k)**(N-1)``.
    """
    rho, hit, no_demand, _ = _factors(pop, num_users)
    receive = hit - rho
    bfd = float(np.mean(receive * rho))
    tnfd = float(np.mean(receive * (1.0 - rho - no_demand)))
    return bfd, tnfd


def mode_probabilities_det(pop: PopularityDist, num_users: int) -> ModeProbabilities:
    rho, hit, no_demand, demand = _factors(pop, num_users)
    receive = hit - rho
    # 1 - P_hit can round to -1e-17 when N == m.
    miss = max(1.0 - hit, 0.0)
    bfd, tnfd = bfd_tnfd_split_det(pop, num_users)
    return ModeProbabilities(
        p_sr=float(np.mean(rho * no_demand)),
        p_sr_hdtx=float(np.mean(rho * demand)),
        p_fdtr=float(np.mean(receive * demand)),
        p_hdtx=float(np.mean(miss * demand)),
        p_hdrx=float(np.mean(receive * no_demand)),
        p_ho=float(np.mean(miss * no_demand)),
        policy=Policy.DETERMINISTIC,
        provenance=Engine.CLOSED_FORM,
        p_bfd=bfd,
        p_tnfd=tnfd,
    )
