"""Flat result records, CSV/JSON serialization and JSON run configuration.

Every record kind has a fixed, ordered schema; the first column is always
``schema_version``. Numbers are written with 12 significant digits, missing
values as an empty CSV cell (``null`` in JSON).
"""
from __future__ import annotations

import csv
import io
import json
import os
import sys
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConfigError, InvalidArgument
from .modes import MODE_NAMES

SCHEMA_VERSION = 1

_NETWORK = ["policy", "engine", "num_users", "library_size", "gamma_r", "gamma_c"]

MODE_SCHEMA = (
    ["schema_version", "panel", "swept", "value"]
    + _NETWORK
    + ["p_" + m for m in MODE_NAMES]
    + ["p_bfd", "p_tnfd", "p_hd", "p_fd", "p_tx", "p_rx"]
    + ["se_" + m for m in MODE_NAMES]
    + ["se_bfd", "se_tnfd", "trials", "seed", "error"]
)
PMF_SCHEMA = ["schema_version", "panel"] + _NETWORK + ["mode", "source", "prob", "count", "mass", "trials", "seed"]
OPTIMUM_SCHEMA = [
    "schema_version", "metric", "engine", "num_users", "library_size", "gamma_r", "gamma_c",
    "value", "is_optimum", "at_boundary",
]
VALIDATION_SCHEMA = [
    "schema_version", "policy", "num_users", "library_size", "gamma_r", "gamma_c",
    "engine", "reference", "mode", "value", "reference_value", "delta", "std_error",
    "tolerance", "passed", "trials", "seed",
]

SCHEMAS = {
    "modes": MODE_SCHEMA,
    "pmf": PMF_SCHEMA,
    "optimum": OPTIMUM_SCHEMA,
    "validation": VALIDATION_SCHEMA,
}

FORMATS = ("csv", "json")


def _scalar(value):
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    return value


def format_value(value) -> str:
    value = _scalar(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _json_value(value):
    value = _scalar(value)
    if isinstance(value, float):
        return float(format(value, ".12g"))
    return value


def check_record(record: dict, schema: list) -> None:
    unknown = set(record) - set(schema)
    if unknown:
        raise InvalidArgument(f"record keys outside schema: {sorted(unknown)}")


def records_to_text(records: Iterable[dict], fmt: str, schema: list) -> str:
    records = list(records)
    for record in records:
        check_record(record, schema)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(schema)
        for record in records:
            writer.writerow([format_value(record.get(key)) for key in schema])
        return buf.getvalue()
    if fmt == "json":
        rows = [{key: _json_value(record.get(key)) for key in schema} for record in records]
        return json.dumps(rows, indent=2) + "\n"
    raise InvalidArgument(f"unknown output format {fmt!r}; expected csv or json")


def write_records(records: Iterable[dict], fmt: str = "csv", path=None, schema: Optional[list] = None) -> None:
    """Write records to ``path`` (or standard output when ``path`` is None or ``-``)."""
    text = records_to_text(records, fmt, schema or MODE_SCHEMA)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_records(path, fmt: Optional[str] = None) -> list[dict]:
    """Read records back; CSV values stay strings, empty cells become None."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower() or "csv"
    text = path.read_text(encoding="utf-8")
    if fmt == "json":
        return json.loads(text)
    reader = csv.DictReader(io.StringIO(text))
    return [{k: (v if v != "" else None) for k, v in row.items()} for row in reader]


# --- run configuration -----------------------------------------------------

COMMANDS = ("analyze", "simulate", "sweep", "pmf", "optimize", "validate")
DEFAULT_SEED = 42
SEED_ENV = "CACHEMODES_SEED"


@dataclass
class RunConfig:
    """One CLI invocation: file values first, then flags on top."""

    command: str
    policy: Optional[str] = None
    n: Optional[int] = None
    m: Optional[int] = None
    gamma_r: Optional[float] = None
    gamma_c: Optional[float] = None
    engine: Optional[str] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    format: str = "csv"
    preset: Optional[str] = None
    mode: Optional[str] = None
    p: Optional[float] = None
    metric: Optional[str] = None
    grid: Optional[str] = None
    param: Optional[str] = None
    values: Optional[str] = None
    engines: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected csv or json")

    @classmethod
    def keys(cls) -> set:
        return {f.name for f in fields(cls)}


_KEY_TYPES = {
    "n": int, "m": int, "trials": int, "seed": int, "workers": int,
    "gamma_r": float, "gamma_c": float, "p": float,
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    unknown = sorted(set(data) - RunConfig.keys())
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) {', '.join(unknown)}")
    for key, kind in _KEY_TYPES.items():
        if key in data and data[key] is not None:
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{source}: {key} must be a number")
            if kind is int and value != int(value):
                raise ConfigError(f"{source}: {key} must be an integer")
            data[key] = kind(value)
    for key in ("grid", "values", "engines"):
        if isinstance(data.get(key), list):
            data[key] = ",".join(str(v) for v in data[key])
    return data


def load_config(path, overrides: Optional[dict] = None, environ=None) -> RunConfig:
    """Read a JSON run configuration; non-None ``overrides`` (CLI flags) win."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    data = parse_config_text(text, str(path))
    return build_run_config(data, overrides or {}, environ)


def build_run_config(file_values: dict, overrides: dict, environ=None) -> RunConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if merged.get("seed") is None:
        merged["seed"] = env_seed(environ)
    if "command" not in merged:
        raise ConfigError("no command given")
    return RunConfig(**{k: v for k, v in merged.items() if k in RunConfig.keys()})


def env_seed(environ=None) -> int:
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV)
    if raw in (None, ""):
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None
