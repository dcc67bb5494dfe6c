"""Shared vocabulary: caching policies, engines and the six-mode probability record."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Optional

from .errors import InvalidArgument

MODE_NAMES = ("sr", "sr_hdtx", "fdtr", "hdtx", "hdrx", "ho")

# Slack for probabilities computed as differences, e.g. 1 - P_hit when N == m.
_RANGE_TOL = 1e-12
SUM_TOL = 1e-9
SPLIT_TOL = 1e-12


class Policy(str, Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"

    @classmethod
    def parse(cls, value: "Policy | str") -> "Policy":
        if isinstance(value, Policy):
            return value
        text = str(value).strip().lower()
        aliases = {"d": "deterministic", "det": "deterministic", "s": "stochastic", "stoch": "stochastic"}
        try:
            return cls(aliases.get(text, text))
        except ValueError:
            raise InvalidArgument(f"unknown caching policy {value!r}") from None


class Engine(str, Enum):
    """Where a set of mode probabilities came from."""

    CLOSED_FORM = "closed_form"
    EXACT = "exact"
    FAST = "fast"
    MONTE_CARLO = "monte_carlo"

    @classmethod
    def parse(cls, value: "Engine | str") -> "Engine":
        if isinstance(value, Engine):
            return value
        text = str(value).strip().lower().replace("-", "_")
        aliases = {"mc": "monte_carlo", "closed": "closed_form", "enumeration": "exact"}
        try:
            return cls(aliases.get(text, text))
        except ValueError:
            raise InvalidArgument(f"unknown engine {value!r}") from None


@dataclass(frozen=True)
class ModeProbabilities:
    """Probabilities of the six operating modes of an arbitrary user.

    ``p_bfd``/``p_tnfd`` split ``p_fdtr`` into the bi-directional and
    three-node configurations when the source can compute it.
    """

    p_sr: float
    p_sr_hdtx: float
    p_fdtr: float
    p_hdtx: float
    p_hdrx: float
    p_ho: float
    policy: Policy
    provenance: Engine
    p_bfd: Optional[float] = None
    p_tnfd: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            if not f.name.startswith("p_"):
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            value = float(value)
            if not math.isfinite(value) or value < -_RANGE_TOL or value > 1 + _RANGE_TOL:
                raise InvalidArgument(f"{f.name}={value!r} is not a probability")
            object.__setattr__(self, f.name, value)
        if (self.p_bfd is None) != (self.p_tnfd is None):
            raise InvalidArgument("p_bfd and p_tnfd must be given together")
        if self.p_bfd is not None and abs(self.p_bfd + self.p_tnfd - self.p_fdtr) > SPLIT_TOL:
            raise InvalidArgument(f"p_bfd + p_tnfd = {self.p_bfd + self.p_tnfd!r} differs from p_fdtr={self.p_fdtr!r}")
        if abs(self.total() - 1.0) > SUM_TOL:
            raise InvalidArgument(f"mode probabilities sum to {self.total()!r}, not 1")

    def values(self) -> tuple:
        return tuple(getattr(self, "p_" + name) for name in MODE_NAMES)

    def as_dict(self) -> dict:
        return dict(zip(MODE_NAMES, self.values()))

    def total(self) -> float:
        return math.fsum(self.values())

    @property
    def has_split(self) -> bool:
        return self.p_bfd is not None

    def with_split(self, p_bfd: float, p_tnfd: float) -> "ModeProbabilities":
        return replace(self, p_bfd=p_bfd, p_tnfd=p_tnfd)
