"""Mode probabilities under stochastic (i.i.d. Zipf) caching.

Two engines are provided:

* :func:`mode_probabilities_exact` enumerates every caching permutation of
  the N users. Permutation rows are laid out in blocks: block ``v`` holds the
  ``m**(N-1)`` rows whose first entry (the tagged user's cache) is ``v``. Rows
  are decoded on the fly from their mixed-radix index, so neither the
  permutation table nor any block of it is ever materialized.
* :func:`mode_probabilities_fast` collapses the same sums in O(m) using the
  independence of the other users' caches.

For the tagged user caching ``v`` in placement row ``r`` the request side
has three disjoint outcomes: the own content (``rho_v``), a content held by
some other user but not by the tagged user (``sum(rho over distinct row
contents) - rho_v``), or a content absent from the row.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import CachingDist, PopularityDist
from .errors import CapacityError, InvalidArgument
from .modes import Engine, ModeProbabilities, Policy

DEFAULT_CAP = 10**7
MAX_WIDTH = 64
_CHUNK_ROWS = 1 << 16


@dataclass(frozen=True)
class PermutationIndex:
    """1-based row ``row`` of the ``radix**width`` x ``width`` permutation table."""

    row: int
    radix: int
    width: int

    def __post_init__(self):
        if self.radix < 1 or self.width < 1:
            raise InvalidArgument("radix and width must be >= 1")
        if not 1 <= self.row <= self.radix**self.width:
            raise InvalidArgument(f"row {self.row} outside 1..{self.radix}**{self.width}")


@dataclass(frozen=True)
class BlockAddress:
    """Row ``row_within_block`` of the block whose tagged user caches ``content``."""

    content: int
    row_within_block: int
    radix: int
    width: int

    def __post_init__(self):
        if not 1 <= self.content <= self.radix:
            raise InvalidArgument(f"content {self.content} outside 1..{self.radix}")
        if not 1 <= self.row_within_block <= self.block_rows:
            raise InvalidArgument(f"row {self.row_within_block} outside block of {self.block_rows} rows")

    @property
    def block_rows(self) -> int:
        return self.radix ** (self.width - 1)

    @property
    def global_row(self) -> int:
        return (self.content - 1) * self.block_rows + self.row_within_block

    @classmethod
    def from_index(cls, index: PermutationIndex) -> "BlockAddress":
        block_rows = index.radix ** (index.width - 1)
        content, offset = divmod(index.row - 1, block_rows)
        return cls(content + 1, offset + 1, index.radix, index.width)

    def to_index(self) -> PermutationIndex:
        return PermutationIndex(self.global_row, self.radix, self.width)


@dataclass(frozen=True)
class EventProbabilities:
    p_miss: float
    p_own_cache: float
    p_rest_cache: float
    p_demand: float


def decode_permutation(index: PermutationIndex) -> list[int]:
    """Contents cached by users 1..N in the given row; user 1 is the slowest digit."""
    rest = index.row - 1
    digits = [0] * index.width
    for pos in range(index.width - 1, -1, -1):
        rest, digits[pos] = divmod(rest, index.radix)
    return [d + 1 for d in digits]


def encode_permutation(row: Sequence[int], radix: int) -> PermutationIndex:
    value = 0
    for content in row:
        if not 1 <= content <= radix:
            raise InvalidArgument(f"content {content} outside 1..{radix}")
        value = value * radix + (content - 1)
    return PermutationIndex(value + 1, radix, len(row))


def miss_probability(row: Sequence[int], pop: PopularityDist) -> float:
    """Probability that a request hits none of the contents present in ``row``."""
    distinct = sorted(set(row))
    return max(0.0, 1.0 - math.fsum(pop.mass(c) for c in distinct))


def rest_cache_probability(row: Sequence[int], cache: CachingDist) -> float:
    """Probability that users 2..N cache exactly the contents in ``row[1:]``."""
    return math.prod(cache.mass(c) for c in row[1:])


def demand_probability(content: int, pop: PopularityDist, num_users: int) -> float:
    """Probability that at least one of the other N-1 users requests ``content``."""
    if num_users < 1:
        raise InvalidArgument("num_users must be >= 1")
    return 1.0 - (1.0 - pop.mass(content)) ** (num_users - 1)


def event_probabilities(
    row: Sequence[int], pop: PopularityDist, cache: CachingDist, num_users: int | None = None
) -> EventProbabilities:
    n = len(row) if num_users is None else num_users
    return EventProbabilities(
        p_miss=miss_probability(row, pop),
        p_own_cache=cache.mass(row[0]),
        p_rest_cache=rest_cache_probability(row, cache),
        p_demand=demand_probability(row[0], pop, n),
    )


def receive_probability(row: Sequence[int], pop: PopularityDist) -> float:
    """Probability the tagged user (``row[0]``) requests a content only others hold."""
    own = row[0]
    return math.fsum(pop.mass(c) for c in set(row) if c != own)


def _check_inputs(pop: PopularityDist, cache: CachingDist, num_users: int) -> None:
    if pop.library_size != cache.library_size:
        raise InvalidArgument("popularity and caching distributions differ in library size")
    if num_users < 1:
        raise InvalidArgument(f"num_users must be >= 1, got {num_users}")


def _chunk_sums(start: int, stop: int, rho: np.ndarray, mu: np.ndarray, width: int):
    """Per-block partial sums over global rows ``start..stop-1`` (0-based).

    Returns ``(first_block, weight, receive, miss)`` where the arrays hold,
    for each block touched, sum of Y, sum of Y * receive and sum of Y * miss.
    """
    m = rho.size
    powers = m ** np.arange(width - 1, -1, -1, dtype=np.int64)
    g = np.arange(start, stop, dtype=np.int64)
    digits = (g[:, None] // powers) % m
    own, others = digits[:, 0], digits[:, 1:]
    y = np.prod(mu[others], axis=1)
    ordered = np.sort(others, axis=1)
    first = np.ones_like(ordered, dtype=bool)
    first[:, 1:] = ordered[:, 1:] != ordered[:, :-1]
    keep = first & (ordered != own[:, None])
    held_by_others = np.sum(np.where(keep, rho[ordered], 0.0), axis=1)
    row_miss = 1.0 - rho[own] - held_by_others
    v0 = int(own[0])
    local = own - v0
    size = int(own[-1]) - v0 + 1
    return (
        v0,
        np.bincount(local, weights=y, minlength=size),
        np.bincount(local, weights=y * held_by_others, minlength=size),
        np.bincount(local, weights=y * row_miss, minlength=size),
    )


def _chunk_task(args):
    return _chunk_sums(*args)


def mode_probabilities_exact(
    pop: PopularityDist,
    cache: CachingDist,
    num_users: int,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
) -> ModeProbabilities:
    """Enumerate all ``m**N`` placements and accumulate the six modes.

    Each placement row in block ``v`` carries weight ``mu_v * Pr(Y | row)``
    and splits over the request branches (own hit, receive, miss) crossed
    with demand / no demand for content ``v``.
    """
    _check_inputs(pop, cache, num_users)
    if num_users > MAX_WIDTH:
        raise InvalidArgument(f"exact engine supports N <= {MAX_WIDTH}, got {num_users}")
    m = pop.library_size
    if m**num_users > cap:
        raise CapacityError(
            f"m**N = {m}**{num_users} exceeds the exact-engine cap {cap}; use the fast engine"
        )
    rho, mu = pop.masses, cache.masses
    total = m**num_users
    tasks = [
        (lo, min(lo + _CHUNK_ROWS, total), rho, mu, num_users)
        for lo in range(0, total, _CHUNK_ROWS)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_task, tasks))
    else:
        parts = [_chunk_sums(*t) for t in tasks]

    # Combine in ascending row order so the result does not depend on workers.
    weight, receive, miss = np.zeros(m), np.zeros(m), np.zeros(m)
    for v0, w, r, x in parts:
        weight[v0:v0 + w.size] += w
        receive[v0:v0 + r.size] += r
        miss[v0:v0 + x.size] += x

    demand = 1.0 - (1.0 - rho) ** (num_users - 1)
    acc = [
        np.dot(mu, weight * rho * (1.0 - demand)),
        np.dot(mu, weight * rho * demand),
        np.dot(mu, receive * demand),
        np.dot(mu, miss * demand),
        np.dot(mu, receive * (1.0 - demand)),
        np.dot(mu, miss * (1.0 - demand)),
    ]
    return ModeProbabilities(*map(float, acc), policy=Policy.STOCHASTIC, provenance=Engine.EXACT)


def mode_probabilities_fast(pop: PopularityDist, cache: CachingDist, num_users: int) -> ModeProbabilities:
    """O(m) product form of the exact enumeration.

    Given the tagged user caches ``v``, content ``x != v`` is missing from the
    other users' caches with probability ``(1 - mu_x)**(N-1)``; summing
    ``rho_x`` times that gives the expected miss mass without enumeration.
    """
    _check_inputs(pop, cache, num_users)
    rho, mu = pop.masses, cache.masses
    no_demand = (1.0 - rho) ** (num_users - 1)
    demand = 1.0 - no_demand
    absent = (1.0 - mu) ** (num_users - 1)
    miss = np.clip(np.dot(rho, absent) - rho * absent, 0.0, None)
    # Summed directly rather than as 1 - rho - miss so that N = 1 gives exact zeros.
    present = 1.0 - absent
    receive = np.clip(np.dot(rho, present) - rho * present, 0.0, None)
    return ModeProbabilities(
        p_sr=float(np.dot(mu, rho * no_demand)),
        p_sr_hdtx=float(np.dot(mu, rho * demand)),
        p_fdtr=float(np.dot(mu, demand * receive)),
        p_hdtx=float(np.dot(mu, demand * miss)),
        p_hdrx=float(np.dot(mu, no_demand * receive)),
        p_ho=float(np.dot(mu, no_demand * miss)),
        policy=Policy.STOCHASTIC,
        provenance=Engine.FAST,
    )


def permutation_count(library_size: int, num_users: int) -> int:
    return library_size**num_users
