"""Parameter sweeps, policy comparisons, the gamma_c grid search and validation.

Built-in presets regenerate the data behind each published figure:

``fig2``  deterministic caching, m=500, gamma_r=0.8, N swept
``fig3``  stochastic caching on a small library (m=7) where exact enumeration is cheap
``fig4``  stochastic caching, m=500, gamma_r=0.8, gamma_c=1.6, N swept
``fig5``  HD/FD/TX/RX versus gamma_r, gamma_c and m for both policies
``fig6``  configurations whose node-count PMFs are compared
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .deterministic import mode_probabilities_det
from .distributions import NetworkConfig, caching_dist, popularity
from .errors import CacheModesError, InvalidArgument
from .metrics import AGGREGATES, AggregateMetrics, aggregate_metrics
from .modes import MODE_NAMES, Engine, ModeProbabilities, Policy
from .simulator import run_trials
from .stochastic import DEFAULT_CAP, mode_probabilities_exact, mode_probabilities_fast

log = logging.getLogger(__name__)

SWEEPABLE = ("num_users", "library_size", "gamma_r", "gamma_c")
_PARAM_ALIASES = {"N": "num_users", "n": "num_users", "m": "library_size", "M": "library_size"}


def resolve_engine(config: NetworkConfig, engine: Optional[Engine | str] = None, cap: int = DEFAULT_CAP) -> Engine:
    """Pick the analytical engine for ``config`` unless one is pinned."""
    if engine is not None:
        engine = Engine.parse(engine)
        allowed = {
            Policy.DETERMINISTIC: (Engine.CLOSED_FORM, Engine.MONTE_CARLO),
            Policy.STOCHASTIC: (Engine.EXACT, Engine.FAST, Engine.MONTE_CARLO),
        }[config.policy]
        if engine not in allowed:
            raise InvalidArgument(f"engine {engine.value} does not apply to {config.policy.value} caching")
        return engine
    if config.policy is Policy.DETERMINISTIC:
        return Engine.CLOSED_FORM
    if config.library_size**config.num_users <= cap:
        return Engine.EXACT
    return Engine.FAST


def evaluate(
    config: NetworkConfig,
    engine: Optional[Engine | str] = None,
    *,
    trials: Optional[int] = None,
    seed: int = 42,
    workers: int = 1,
    cap: int = DEFAULT_CAP,
):
    """Mode probabilities of ``config`` from one engine.

    Returns ``(modes, std_errors)``; ``std_errors`` is None except for Monte Carlo.
    """
    engine = resolve_engine(config, engine, cap)
    pop = popularity(config)
    if engine is Engine.CLOSED_FORM:
        return mode_probabilities_det(pop, config.num_users), None
    if engine is Engine.EXACT:
        return mode_probabilities_exact(pop, caching_dist(config), config.num_users, cap=cap, workers=workers), None
    if engine is Engine.FAST:
        return mode_probabilities_fast(pop, caching_dist(config), config.num_users), None
    if trials is None:
        raise InvalidArgument("Monte Carlo evaluation needs a trial count")
    estimate = run_trials(config, trials, seed, workers=workers)
    return estimate.mode_probs, estimate.std_errors


@dataclass(frozen=True)
class SweepSpec:
    swept_parameter: str
    values: tuple
    fixed: NetworkConfig
    engines: tuple = (None,)
    trials: Optional[int] = None
    seed: int = 42
    name: str = ""

    def __post_init__(self):
        param = _PARAM_ALIASES.get(self.swept_parameter, self.swept_parameter)
        if param not in SWEEPABLE:
            raise InvalidArgument(f"cannot sweep {self.swept_parameter!r}; choose from N, m, gamma_r, gamma_c")
        object.__setattr__(self, "swept_parameter", param)
        values = tuple(self.values)
        if not values:
            raise InvalidArgument("a sweep needs at least one value")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidArgument("sweep values must be strictly increasing")
        object.__setattr__(self, "values", values)
        if param == "gamma_c" and self.fixed.policy is Policy.DETERMINISTIC:
            raise InvalidArgument("deterministic caching does not depend on gamma_c")
        engines = tuple(None if e is None else Engine.parse(e) for e in self.engines)
        if not engines:
            raise InvalidArgument("a sweep needs at least one engine")
        if Engine.MONTE_CARLO in engines and not self.trials:
            raise InvalidArgument("Monte Carlo sweeps need a trial count")
        object.__setattr__(self, "engines", engines)


@dataclass(frozen=True)
class SweepRow:
    value: float
    engine: Optional[Engine]
    config: Optional[NetworkConfig]
    modes: Optional[ModeProbabilities] = None
    aggregates: Optional[AggregateMetrics] = None
    std_errors: Optional[dict] = None
    error: Optional[str] = None
    spec_name: str = ""
    swept_parameter: str = ""
    trials: Optional[int] = None
    seed: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def ok_rows(self) -> list:
        return [row for row in self.rows if row.ok]

    def curve(self, attr: str, engine: Optional[Engine] = None) -> list:
        """(value, number) pairs for a mode (``"p_fdtr"``) or aggregate (``"hd"``)."""
        out = []
        for row in self.ok_rows():
            if engine is not None and row.engine is not engine:
                continue
            if hasattr(row.modes, attr):
                out.append((row.value, getattr(row.modes, attr)))
            else:
                out.append((row.value, row.aggregates.get(attr)))
        return out


def run_sweep(spec: SweepSpec, workers: int = 1, cap: int = DEFAULT_CAP) -> SweepResult:
    """Evaluate every engine at every swept value.

    Invalid combinations (deterministic N > m, an exact run over the cap...)
    become error rows; the sweep carries on.
    """
    result = SweepResult()
    for value in spec.values:
        try:
            config = spec.fixed.with_value(spec.swept_parameter, value)
        except CacheModesError as exc:
            for engine in spec.engines:
                result.rows.append(SweepRow(value, engine, None, error=str(exc), spec_name=spec.name,
                                            swept_parameter=spec.swept_parameter))
            continue
        for engine in spec.engines:
            try:
                resolved = resolve_engine(config, engine, cap)
                modes, se = evaluate(config, resolved, trials=spec.trials, seed=spec.seed, workers=workers, cap=cap)
            except CacheModesError as exc:
                log.warning("sweep %s at %s=%s: %s", spec.name, spec.swept_parameter, value, exc)
                result.rows.append(SweepRow(value, engine, config, error=str(exc), spec_name=spec.name,
                                            swept_parameter=spec.swept_parameter))
                continue
            mc = resolved is Engine.MONTE_CARLO
            result.rows.append(SweepRow(
                value, resolved, config, modes, aggregate_metrics(modes), se,
                spec_name=spec.name, swept_parameter=spec.swept_parameter,
                trials=spec.trials if mc else None, seed=spec.seed if mc else None,
            ))
    return result


@dataclass(frozen=True)
class PolicyComparison:
    config: NetworkConfig
    deterministic: Optional[ModeProbabilities]
    stochastic: Optional[ModeProbabilities]
    error: Optional[str] = None

    @property
    def det_aggregates(self) -> AggregateMetrics:
        return aggregate_metrics(self.deterministic)

    @property
    def stoch_aggregates(self) -> AggregateMetrics:
        return aggregate_metrics(self.stochastic)

    @property
    def deltas(self) -> dict:
        """Stochastic minus deterministic, per mode and per aggregate."""
        out = {name: s - d for name, s, d in zip(MODE_NAMES, self.stochastic.values(), self.deterministic.values())}
        det = self.det_aggregates.as_dict()
        for key, value in self.stoch_aggregates.as_dict().items():
            out[key] = value - det[key]
        return out


def compare_policies(configs: Iterable[NetworkConfig], stochastic_engine=None, cap: int = DEFAULT_CAP) -> list:
    """Evaluate each grid point under both caching policies side by side.

    A point that one policy cannot realize (deterministic N > m) is kept as
    an error entry.
    """
    table = []
    for config in configs:
        try:
            det_cfg = NetworkConfig(config.num_users, config.library_size, config.gamma_r, config.gamma_c,
                                    Policy.DETERMINISTIC)
            sto_cfg = NetworkConfig(config.num_users, config.library_size, config.gamma_r, config.gamma_c,
                                    Policy.STOCHASTIC)
            det, _ = evaluate(det_cfg, cap=cap)
            sto, _ = evaluate(sto_cfg, stochastic_engine, cap=cap)
        except CacheModesError as exc:
            table.append(PolicyComparison(config, None, None, str(exc)))
            continue
        table.append(PolicyComparison(config, det, sto))
    return table


@dataclass(frozen=True)
class GammaOptimum:
    metric: str
    gamma_c: float
    value: float
    curve: tuple
    at_boundary: bool


def optimize_gamma_c(
    metric: str,
    grid: Sequence[float],
    fixed: NetworkConfig,
    engine: Optional[Engine | str] = Engine.FAST,
    trials: Optional[int] = None,
    seed: int = 42,
) -> GammaOptimum:
    """Grid search for the caching skew that maximizes an aggregate metric.

    Ties go to the smallest gamma_c. A maximum on the first or last grid
    point is flagged as ``at_boundary``: the grid shows no interior optimum.
    """
    metric = str(metric).strip().upper()
    if metric not in AGGREGATES:
        raise InvalidArgument(f"metric must be one of {AGGREGATES}, got {metric!r}")
    grid = [float(g) for g in grid]
    if not grid:
        raise InvalidArgument("gamma_c grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgument("gamma_c grid must be strictly increasing")
    if fixed.policy is not Policy.STOCHASTIC:
        raise InvalidArgument("gamma_c only matters under stochastic caching")
    curve = []
    for g in grid:
        modes, _ = evaluate(fixed.with_value("gamma_c", g), engine, trials=trials, seed=seed)
        curve.append((g, aggregate_metrics(modes).get(metric)))
    values = np.array([v for _, v in curve])
    best = int(np.argmax(values))  # first maximum, i.e. smallest gamma_c on ties
    at_boundary = len(grid) > 1 and best in (0, len(grid) - 1)
    return GammaOptimum(metric, grid[best], float(values[best]), tuple(curve), at_boundary)


def gamma_grid(start: float, stop: float, step: float) -> list:
    """Inclusive grid ``start, start+step, ..., stop`` without float drift."""
    if step <= 0 or stop < start:
        raise InvalidArgument("grid needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 10) for i in range(count)]


@dataclass(frozen=True)
class ValidationEntry:
    engine: Engine
    reference: Engine
    mode: str
    value: float
    reference_value: float
    std_error: Optional[float]
    tolerance: float
    passed: bool

    @property
    def delta(self) -> float:
        return self.value - self.reference_value


@dataclass(frozen=True)
class ValidationReport:
    config: NetworkConfig
    entries: tuple
    trials: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def validate(
    config: NetworkConfig,
    trials: int = 100_000,
    seed: int = 42,
    workers: int = 1,
    sigmas: float = 3.0,
    cap: int = DEFAULT_CAP,
) -> ValidationReport:
    """Cross-check every applicable engine against the Monte Carlo estimate.

    Analytical engines are also compared against each other: exact versus
    fast within 1e-10 (1e-12 when N = 1).
    """
    estimate = run_trials(config, trials, seed, workers=workers)
    mc = estimate.mode_probs
    mc_values = dict(mc.as_dict(), bfd=mc.p_bfd, tnfd=mc.p_tnfd)

    analytic = {}
    if config.policy is Policy.DETERMINISTIC:
        analytic[Engine.CLOSED_FORM] = mode_probabilities_det(popularity(config), config.num_users)
    else:
        pop, cache = popularity(config), caching_dist(config)
        if config.library_size**config.num_users <= cap:
            analytic[Engine.EXACT] = mode_probabilities_exact(pop, cache, config.num_users, cap=cap)
        analytic[Engine.FAST] = mode_probabilities_fast(pop, cache, config.num_users)

    entries = []
    for engine, modes in analytic.items():
        values = modes.as_dict()
        if modes.has_split:
            values.update(bfd=modes.p_bfd, tnfd=modes.p_tnfd)
        for name, value in values.items():
            se = estimate.std_errors[name]
            # A zero-variance estimate must match exactly up to rounding.
            tol = max(sigmas * se, 1e-12)
            entries.append(ValidationEntry(engine, Engine.MONTE_CARLO, name, value, mc_values[name], se, tol,
                                           abs(value - mc_values[name]) <= tol))
    if Engine.EXACT in analytic:
        tol = 1e-12 if config.num_users == 1 else 1e-10
        exact, fast = analytic[Engine.EXACT].as_dict(), analytic[Engine.FAST].as_dict()
        for name in MODE_NAMES:
            entries.append(ValidationEntry(Engine.FAST, Engine.EXACT, name, fast[name], exact[name], None, tol,
                                           abs(fast[name] - exact[name]) <= tol))
    return ValidationReport(config, tuple(entries), estimate.trials, estimate.seed)


# --- presets ---------------------------------------------------------------

FIG2_N = tuple(range(1, 50)) + tuple(range(50, 501, 10))
FIG4_N = tuple(range(10, 501, 10))
FIG5_GAMMA_R = tuple(gamma_grid(0.0, 3.0, 0.1))
FIG5_GAMMA_C = tuple(gamma_grid(0.0, 4.0, 0.1))
FIG5_LIBRARY = (50, 100, 200, 500, 1000, 2000, 5000, 10_000)
FIG6_GAMMA_C = (0.8, 1.6)
FIG6_LIBRARY = (100, 500, 1000)


def _presets() -> dict:
    det, sto = Policy.DETERMINISTIC, Policy.STOCHASTIC
    return {
        "fig2": (
            SweepSpec("num_users", FIG2_N, NetworkConfig(1, 500, 0.8, 0.0, det), name="fig2"),
        ),
        "fig3": (
            SweepSpec("num_users", tuple(range(1, 8)), NetworkConfig(1, 7, 0.8, 1.6, sto),
                      engines=(Engine.EXACT, Engine.FAST), name="fig3"),
        ),
        "fig4": (
            SweepSpec("num_users", FIG4_N, NetworkConfig(10, 500, 0.8, 1.6, sto),
                      engines=(Engine.FAST,), name="fig4"),
        ),
        "fig5": (
            SweepSpec("gamma_r", FIG5_GAMMA_R, NetworkConfig(100, 10_000, 0.0, 1.6, det), name="fig5-gamma_r"),
            SweepSpec("gamma_r", FIG5_GAMMA_R, NetworkConfig(100, 10_000, 0.0, 1.6, sto),
                      engines=(Engine.FAST,), name="fig5-gamma_r"),
            SweepSpec("gamma_c", FIG5_GAMMA_C, NetworkConfig(100, 10_000, 2.5, 0.0, sto),
                      engines=(Engine.FAST,), name="fig5-gamma_c"),
            SweepSpec("library_size", FIG5_LIBRARY, NetworkConfig(50, 50, 0.8, 1.6, det), name="fig5-m"),
            SweepSpec("library_size", FIG5_LIBRARY, NetworkConfig(50, 50, 0.8, 1.6, sto),
                      engines=(Engine.FAST,), name="fig5-m"),
        ),
        "fig6": (
            SweepSpec("num_users", (50,), NetworkConfig(50, 500, 0.8, 1.6, det), name="fig6-policy"),
            SweepSpec("num_users", (50,), NetworkConfig(50, 500, 0.8, 1.6, sto),
                      engines=(Engine.FAST,), name="fig6-policy"),
            SweepSpec("gamma_c", FIG6_GAMMA_C, NetworkConfig(50, 500, 0.8, 1.6, sto),
                      engines=(Engine.FAST,), name="fig6-gamma_c"),
            SweepSpec("library_size", FIG6_LIBRARY, NetworkConfig(50, 500, 0.8, 1.6, sto),
                      engines=(Engine.FAST,), name="fig6-m"),
        ),
    }


PRESETS = _presets()


def preset(name: str) -> tuple:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise InvalidArgument(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def run_preset(name: str, workers: int = 1) -> SweepResult:
    combined = SweepResult()
    for spec in preset(name):
        combined.rows.extend(run_sweep(spec, workers=workers).rows)
    return combined
