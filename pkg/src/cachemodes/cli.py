"""Command-line front end: ``cachemodes <command> [options]``.

Exit status is 0 on success, 1 on a domain error or failed validation and 2
on malformed flags or an unreadable configuration file.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import __version__
from .distributions import NetworkConfig
from .errors import CacheModesError, ConfigError, InvalidArgument
from .experiments import (
    SweepSpec,
    evaluate,
    gamma_grid,
    optimize_gamma_c,
    preset,
    resolve_engine,
    run_sweep,
    validate,
)
from .metrics import aggregate_metrics, mode_pmf, mode_probability
from .modes import MODE_NAMES, Engine, Policy
from .records import (
    MODE_SCHEMA,
    OPTIMUM_SCHEMA,
    PMF_SCHEMA,
    SCHEMA_VERSION,
    VALIDATION_SCHEMA,
    RunConfig,
    build_run_config,
    load_config,
    write_records,
)
from .simulator import empirical_pmf, normalize_mode_name, run_trials

log = logging.getLogger("cachemodes")

DEFAULT_GAMMA_R = 0.8
DEFAULT_GAMMA_C = 1.6
DEFAULT_GRID = "0:4:0.1"
DEFAULT_VALIDATE_TRIALS = 100_000
_SWEEP_ALIASES = {"N": "num_users", "n": "num_users", "m": "library_size", "M": "library_size"}
PMF_MODES = ("SR", "SR_HDTX", "FDTR", "HDTX", "HDRX", "HO", "HD", "FD", "TX", "RX")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _network_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("network")
    g.add_argument("--policy", choices=[x.value for x in Policy], help="caching policy")
    g.add_argument("--n", type=int, help="number of users N")
    g.add_argument("--m", type=int, help="library size m")
    g.add_argument("--gamma-r", dest="gamma_r", type=float, help=f"request skew (default {DEFAULT_GAMMA_R})")
    g.add_argument("--gamma-c", dest="gamma_c", type=float, help=f"caching skew (default {DEFAULT_GAMMA_C})")


def _common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (default: $CACHEMODES_SEED or 42)")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--workers", type=int, help="worker processes for Monte Carlo and enumeration")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cachemodes", description="Operating modes of cache-enabled full-duplex D2D networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("analyze", help="analytical mode probabilities")
    _network_args(p)
    p.add_argument("--engine", help="closed_form | exact | fast (default: automatic)")
    _common_args(p)

    p = sub.add_parser("simulate", help="Monte Carlo mode probabilities")
    _network_args(p)
    p.add_argument("--trials", type=int, help="number of network realizations")
    _common_args(p)

    p = sub.add_parser("sweep", help="parameter sweep or built-in figure preset")
    _network_args(p)
    p.add_argument("--preset", help="fig2 | fig3 | fig4 | fig5 | fig6")
    p.add_argument("--param", help="swept parameter: N, m, gamma_r or gamma_c")
    p.add_argument("--values", help="comma list (10,20,30) or inclusive range start:stop:step")
    p.add_argument("--engines", help="comma list of engines (default: automatic)")
    p.add_argument("--trials", type=int, help="trials for monte_carlo rows")
    _common_args(p)

    p = sub.add_parser("pmf", help="binomial (and empirical) PMFs of node counts per mode")
    _network_args(p)
    p.add_argument("--mode", help="mode or aggregate (default: all); e.g. HD, FDTR, HO")
    p.add_argument("--p", type=float, help="mode probability; skips the network model")
    p.add_argument("--preset", help="fig6")
    p.add_argument("--engine", help="engine for the mode probability")
    p.add_argument("--trials", type=int, help="also emit empirical PMFs from this many trials")
    _common_args(p)

    p = sub.add_parser("optimize", help="grid search of gamma_c for an aggregate metric")
    _network_args(p)
    p.add_argument("--metric", help="HD | FD | TX | RX")
    p.add_argument("--grid", help=f"start:stop:step or comma list (default {DEFAULT_GRID})")
    p.add_argument("--engine", help="fast (default), exact or monte_carlo")
    p.add_argument("--trials", type=int)
    _common_args(p)

    p = sub.add_parser("validate", help="cross-check analytical engines against Monte Carlo")
    _network_args(p)
    p.add_argument("--trials", type=int, help=f"default {DEFAULT_VALIDATE_TRIALS}")
    _common_args(p)
    return parser


# --- helpers ---------------------------------------------------------------

def _network(cfg: RunConfig) -> NetworkConfig:
    if cfg.n is None or cfg.m is None:
        raise InvalidArgument(f"{cfg.command} needs --n and --m")
    return NetworkConfig(
        num_users=cfg.n,
        library_size=cfg.m,
        gamma_r=DEFAULT_GAMMA_R if cfg.gamma_r is None else cfg.gamma_r,
        gamma_c=DEFAULT_GAMMA_C if cfg.gamma_c is None else cfg.gamma_c,
        policy=cfg.policy or Policy.DETERMINISTIC,
    )


def parse_values(text: str) -> list:
    """``"1,2,5"`` or inclusive ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidArgument(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        values = gamma_grid(start, stop, step)
    else:
        values = [float(x) for x in text.split(",") if x.strip()]
    return [int(v) if float(v).is_integer() and "." not in text else v for v in values]


def _network_fields(config: Optional[NetworkConfig], engine) -> dict:
    if config is None:
        return {"engine": engine}
    return {
        "policy": config.policy,
        "engine": engine,
        "num_users": config.num_users,
        "library_size": config.library_size,
        "gamma_r": config.gamma_r,
        "gamma_c": config.gamma_c,
    }


def mode_record(config, modes, engine, *, std_errors=None, panel="", swept="", value=None,
                trials=None, seed=None, error=None) -> dict:
    rec = {"schema_version": SCHEMA_VERSION, "panel": panel, "swept": swept, "value": value}
    rec.update(_network_fields(config, engine))
    if modes is not None:
        rec.update({"p_" + k: v for k, v in modes.as_dict().items()})
        rec.update(p_bfd=modes.p_bfd, p_tnfd=modes.p_tnfd)
        rec.update({"p_" + k: v for k, v in aggregate_metrics(modes).as_dict().items()})
    if std_errors:
        for name in MODE_NAMES + ("bfd", "tnfd"):
            rec["se_" + name] = std_errors.get(name)
    rec.update(trials=trials, seed=seed, error=error)
    return rec


def sweep_records(result) -> list:
    return [
        mode_record(row.config, row.modes, row.engine, std_errors=row.std_errors, panel=row.spec_name,
                    swept=row.swept_parameter, value=row.value, trials=row.trials, seed=row.seed,
                    error=row.error)
        for row in result.rows
    ]


def pmf_records(config, engine, modes_wanted, prob_of, *, panel="", estimate=None) -> list:
    """Binomial PMF rows (and empirical rows when ``estimate`` is given)."""
    out = []
    base = {"schema_version": SCHEMA_VERSION, "panel": panel}
    base.update(_network_fields(config, engine))
    for mode in modes_wanted:
        p = prob_of(mode)
        pmf = mode_pmf(config.num_users if config else prob_of.num_users, p)
        for count, mass in enumerate(pmf.masses):
            out.append(dict(base, mode=mode, source="binomial", prob=p, count=count, mass=float(mass)))
        if estimate is not None:
            emp = empirical_pmf(estimate, mode)
            for count, mass in enumerate(emp.masses):
                out.append(dict(base, mode=mode, source="empirical", prob=p, count=count, mass=float(mass),
                                trials=estimate.trials, seed=estimate.seed))
    return out


def _modes_list(mode: Optional[str]) -> list:
    if mode is None:
        return list(PMF_MODES)
    return [normalize_mode_name(m) for m in mode.split(",")]


def _announce_seed(seed: int) -> None:
    print(f"seed: {seed}", file=sys.stderr)


# --- commands --------------------------------------------------------------

def cmd_analyze(cfg: RunConfig):
    config = _network(cfg)
    engine = resolve_engine(config, cfg.engine)
    if engine is Engine.MONTE_CARLO:
        raise InvalidArgument("analyze is analytical; use simulate for Monte Carlo")
    modes, _ = evaluate(config, engine, workers=cfg.workers)
    return [mode_record(config, modes, engine)], MODE_SCHEMA, 0


def cmd_simulate(cfg: RunConfig):
    if cfg.trials is None:
        raise InvalidArgument("simulate needs --trials")
    config = _network(cfg)
    _announce_seed(cfg.seed)
    est = run_trials(config, cfg.trials, cfg.seed, workers=cfg.workers)
    rec = mode_record(config, est.mode_probs, Engine.MONTE_CARLO, std_errors=est.std_errors,
                      trials=est.trials, seed=est.seed)
    return [rec], MODE_SCHEMA, 0


def _sweep_specs(cfg: RunConfig) -> list:
    if cfg.preset:
        specs = list(preset(cfg.preset))
        if cfg.engines or cfg.trials:
            engines = tuple(e.strip() for e in cfg.engines.split(",")) if cfg.engines else None
            specs = [
                SweepSpec(s.swept_parameter, s.values, s.fixed, engines or s.engines, cfg.trials or s.trials,
                          cfg.seed, s.name)
                for s in specs
            ]
        return specs
    if not cfg.param or not cfg.values:
        raise InvalidArgument("sweep needs --preset, or --param and --values")
    engines = tuple(e.strip() for e in cfg.engines.split(",")) if cfg.engines else (None,)
    values = parse_values(cfg.values)
    # The swept field needs no flag of its own; start it at the first value.
    flag = {"num_users": "n", "library_size": "m"}.get(_SWEEP_ALIASES.get(cfg.param, cfg.param), cfg.param)
    if getattr(cfg, flag, None) is None:
        cfg = replace(cfg, **{flag: values[0]})
    fixed = _network(cfg)
    return [SweepSpec(cfg.param, values, fixed, engines, cfg.trials, cfg.seed, "custom")]


def cmd_sweep(cfg: RunConfig):
    specs = _sweep_specs(cfg)
    if any(Engine.MONTE_CARLO in s.engines for s in specs):
        _announce_seed(cfg.seed)
    records = []
    for spec in specs:
        records.extend(sweep_records(run_sweep(spec, workers=cfg.workers)))
    return records, MODE_SCHEMA, 0


class _FixedProb:
    def __init__(self, n, p):
        self.num_users, self.p = n, p

    def __call__(self, mode):
        return self.p


def cmd_pmf(cfg: RunConfig):
    if cfg.p is not None:
        if cfg.n is None:
            raise InvalidArgument("pmf --p needs --n")
        modes = _modes_list(cfg.mode)
        records = pmf_records(None, None, modes, _FixedProb(cfg.n, cfg.p))
        for rec in records:
            rec["num_users"] = cfg.n
        return records, PMF_SCHEMA, 0

    if cfg.preset:
        configs = [
            (spec.name, spec.fixed.with_value(spec.swept_parameter, v), spec.engines[0])
            for spec in preset(cfg.preset)
            for v in spec.values
        ]
    else:
        configs = [("", _network(cfg), cfg.engine)]
    if cfg.trials:
        _announce_seed(cfg.seed)
    records = []
    for panel, config, engine in configs:
        engine = resolve_engine(config, engine)
        if engine is Engine.MONTE_CARLO:
            raise InvalidArgument("pmf takes an analytical engine; add --trials for empirical PMFs")
        modes, _ = evaluate(config, engine, workers=cfg.workers)
        estimate = run_trials(config, cfg.trials, cfg.seed, workers=cfg.workers) if cfg.trials else None
        wanted = _modes_list(cfg.mode)
        records.extend(pmf_records(config, engine, wanted, lambda mode: mode_probability(modes, mode),
                                   panel=panel, estimate=estimate))
    return records, PMF_SCHEMA, 0


def cmd_optimize(cfg: RunConfig):
    if not cfg.metric:
        raise InvalidArgument("optimize needs --metric")
    config = _network(cfg)
    if config.policy is not Policy.STOCHASTIC:
        raise InvalidArgument("optimize searches gamma_c, which needs --policy stochastic")
    grid = parse_values(cfg.grid or DEFAULT_GRID)
    engine = Engine.parse(cfg.engine) if cfg.engine else Engine.FAST
    if engine is Engine.MONTE_CARLO:
        if not cfg.trials:
            raise InvalidArgument("optimize with monte_carlo needs --trials")
        _announce_seed(cfg.seed)
    opt = optimize_gamma_c(cfg.metric, grid, config, engine=engine, trials=cfg.trials, seed=cfg.seed)
    records = []
    for g, value in opt.curve:
        records.append({
            "schema_version": SCHEMA_VERSION, "metric": opt.metric, "engine": engine,
            "num_users": config.num_users, "library_size": config.library_size, "gamma_r": config.gamma_r,
            "gamma_c": g, "value": value, "is_optimum": g == opt.gamma_c, "at_boundary": opt.at_boundary,
        })
    log.info("%s optimum gamma_c=%s value=%.6g boundary=%s", opt.metric, opt.gamma_c, opt.value, opt.at_boundary)
    return records, OPTIMUM_SCHEMA, 0


def cmd_validate(cfg: RunConfig):
    config = _network(cfg)
    trials = cfg.trials or DEFAULT_VALIDATE_TRIALS
    _announce_seed(cfg.seed)
    report = validate(config, trials, cfg.seed, workers=cfg.workers)
    records = []
    for e in report.entries:
        records.append({
            "schema_version": SCHEMA_VERSION, "policy": config.policy, "num_users": config.num_users,
            "library_size": config.library_size, "gamma_r": config.gamma_r, "gamma_c": config.gamma_c,
            "engine": e.engine, "reference": e.reference, "mode": e.mode, "value": e.value,
            "reference_value": e.reference_value, "delta": e.delta, "std_error": e.std_error,
            "tolerance": e.tolerance, "passed": e.passed, "trials": report.trials, "seed": report.seed,
        })
    status = 0 if report.passed else 1
    print(f"validation {'passed' if report.passed else 'FAILED'}", file=sys.stderr)
    return records, VALIDATION_SCHEMA, status


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "pmf": cmd_pmf,
    "optimize": cmd_optimize,
    "validate": cmd_validate,
}


def parse_and_run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    flags = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    try:
        if args.config:
            cfg = load_config(args.config, flags)
        else:
            cfg = build_run_config({}, flags)
    except ConfigError as exc:
        print(f"cachemodes: config error: {exc}", file=sys.stderr)
        return 2
    if cfg.command != args.command:
        print(f"cachemodes: config command {cfg.command!r} conflicts with {args.command!r}", file=sys.stderr)
        return 2

    try:
        records, schema, status = COMMANDS[cfg.command](cfg)
        write_records(records, cfg.format, cfg.out, schema=schema)
    except CacheModesError as exc:
        print(f"cachemodes: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cachemodes: I/O error: {exc}", file=sys.stderr)
        return 1
    return status


def main() -> None:
    sys.exit(parse_and_run())


if __name__ == "__main__":
    main()
