"""Zipf request popularity, Zipf cache placement, and the network configuration.

Content indices are 1-based everywhere in the public API: content ``k`` has
mass ``dist.mass(k) == dist.masses[k - 1]`` and samplers return values in
``1..m``.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, PolicyViolation
from .modes import Policy


def _check_size(size) -> int:
    if isinstance(size, bool) or not isinstance(size, numbers.Integral):
        raise InvalidArgument(f"library size must be an integer, got {size!r}")
    if size < 1:
        raise InvalidArgument(f"library size must be >= 1, got {size}")
    return int(size)


def _check_skew(skew) -> float:
    try:
        skew = float(skew)
    except (TypeError, ValueError):
        raise InvalidArgument(f"skew exponent must be a real number, got {skew!r}") from None
    if not math.isfinite(skew) or skew < 0:
        raise InvalidArgument(f"skew exponent must be finite and >= 0, got {skew}")
    return skew


def zipf_pmf(size: int, skew: float) -> np.ndarray:
    """Return ``k**-skew / sum(j**-skew)`` for ``k = 1..size``."""
    size = _check_size(size)
    skew = _check_skew(skew)
    if skew == 0.0:
        return np.full(size, 1.0 / size)
    weights = np.arange(1, size + 1, dtype=np.float64) ** -skew
    return weights / weights.sum()


@dataclass(frozen=True, eq=False)
class ZipfDist:
    masses: np.ndarray
    skew: float

    def __post_init__(self):
        masses = np.array(self.masses, dtype=np.float64)
        if masses.ndim != 1 or masses.size == 0:
            raise InvalidArgument("a distribution needs at least one mass")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def zipf(cls, size: int, skew: float):
        return cls(zipf_pmf(size, skew), _check_skew(skew))

    @property
    def library_size(self) -> int:
        return int(self.masses.size)

    def mass(self, content: int) -> float:
        if not 1 <= content <= self.library_size:
            raise InvalidArgument(f"content index {content} outside 1..{self.library_size}")
        return float(self.masses[content - 1])

    @cached_property
    def cdf(self) -> np.ndarray:
        return _cumulative(self.masses)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw 1-based content indices by inverse-CDF lookup."""
        if size is None:
            return sample_index(self.masses, rng, cdf=self.cdf)
        return _lookup(self.cdf, rng.random(size)) + 1


class PopularityDist(ZipfDist):
    """Request popularity: mass ``k`` is the probability of requesting content ``k``."""


class CachingDist(ZipfDist):
    """Placement distribution: mass ``k`` is the probability a user caches content ``k``."""


@dataclass(frozen=True)
class NetworkConfig:
    num_users: int
    library_size: int
    gamma_r: float = 0.8
    gamma_c: float = 0.0
    policy: Policy = Policy.DETERMINISTIC

    def __post_init__(self):
        if isinstance(self.num_users, bool) or not isinstance(self.num_users, numbers.Integral):
            raise InvalidArgument(f"num_users must be an integer, got {self.num_users!r}")
        if self.num_users < 1:
            raise InvalidArgument(f"num_users must be >= 1, got {self.num_users}")
        object.__setattr__(self, "num_users", int(self.num_users))
        object.__setattr__(self, "library_size", _check_size(self.library_size))
        object.__setattr__(self, "gamma_r", _check_skew(self.gamma_r))
        object.__setattr__(self, "gamma_c", _check_skew(self.gamma_c))
        object.__setattr__(self, "policy", Policy.parse(self.policy))
        if self.policy is Policy.DETERMINISTIC and self.num_users > self.library_size:
            raise PolicyViolation(
                f"deterministic caching needs N <= m (N={self.num_users}, m={self.library_size})"
            )

    def with_value(self, parameter: str, value) -> "NetworkConfig":
        """Copy of this config with one swept parameter replaced."""
        key = {"N": "num_users", "n": "num_users", "m": "library_size", "M": "library_size"}.get(parameter, parameter)
        if key not in ("num_users", "library_size", "gamma_r", "gamma_c"):
            raise InvalidArgument(f"cannot sweep parameter {parameter!r}")
        kwargs = dict(
            num_users=self.num_users,
            library_size=self.library_size,
            gamma_r=self.gamma_r,
            gamma_c=self.gamma_c,
            policy=self.policy,
        )
        if key in ("num_users", "library_size"):
            value = int(value)
        kwargs[key] = value
        return NetworkConfig(**kwargs)


def popularity(config: NetworkConfig) -> PopularityDist:
    return PopularityDist.zipf(config.library_size, config.gamma_r)


def caching_dist(config: NetworkConfig) -> CachingDist:
    return CachingDist.zipf(config.library_size, config.gamma_c)


def _cumulative(masses: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(masses)
    # Pin the top so a uniform draw in [0, 1) can never fall past the last bin.
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return cdf


def _lookup(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """0-based bin of each uniform ``u`` under ``cdf``."""
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.size - 1)


def sample_index(dist, rng: np.random.Generator, *, cdf=None) -> int:
    """Draw one 1-based index with probability equal to its mass."""
    masses = np.asarray(getattr(dist, "masses", dist), dtype=np.float64)
    if masses.size == 0:
        raise InvalidArgument("cannot sample from an empty distribution")
    if cdf is None:
        if abs(masses.sum() - 1.0) > 1e-9:
            raise InvalidArgument(f"masses sum to {masses.sum()!r}, not 1")
        cdf = _cumulative(masses)
    return int(_lookup(cdf, rng.random())) + 1
