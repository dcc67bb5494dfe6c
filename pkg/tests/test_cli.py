import csv
import io
import json
import math

import pytest

from cachemodes.cli import parse_and_run, parse_values
from cachemodes.errors import ConfigError, InvalidArgument
from cachemodes.modes import MODE_NAMES
from cachemodes.records import (
    MODE_SCHEMA,
    PMF_SCHEMA,
    SCHEMA_VERSION,
    env_seed,
    format_value,
    load_config,
    parse_config_text,
    read_records,
    records_to_text,
    write_records,
)


def run(capsys, *argv):
    status = parse_and_run(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_analyze_deterministic(capsys):
    status, out, _ = run(capsys, "analyze", "--policy", "deterministic", "--n", "100", "--m", "500", "--gamma-r", "0.8")
    assert status == 0
    [rec] = rows(out)
    assert out.splitlines()[0].split(",") == MODE_SCHEMA
    assert rec["schema_version"] == str(SCHEMA_VERSION) and rec["engine"] == "closed_form"
    assert abs(math.fsum(float(rec["p_" + k]) for k in MODE_NAMES) - 1) <= 1e-9
    assert rec["p_bfd"] and rec["se_sr"] == ""


def test_pmf_fixed_probability(capsys):
    status, out, _ = run(capsys, "pmf", "--mode", "HD", "--n", "4", "--p", "0.5")
    assert status == 0
    assert [float(r["mass"]) for r in rows(out)] == [0.0625, 0.25, 0.375, 0.25, 0.0625]
    assert out.splitlines()[0].split(",") == PMF_SCHEMA


def test_pmf_with_empirical_rows(capsys):
    status, out, err = run(capsys, "pmf", "--policy", "stochastic", "--n", "4", "--m", "6", "--mode", "FD,HO",
                           "--trials", "500", "--seed", "3")
    assert status == 0 and "seed: 3" in err
    got = rows(out)
    assert {(r["mode"], r["source"]) for r in got} == {
        ("FD", "binomial"), ("FD", "empirical"), ("HO", "binomial"), ("HO", "empirical")}
    assert len(got) == 4 * 5


def test_simulate_prints_seed(capsys, monkeypatch):
    monkeypatch.setenv("CACHEMODES_SEED", "77")
    status, out, err = run(capsys, "simulate", "--n", "3", "--m", "5", "--trials", "100")
    assert status == 0 and err.strip() == "seed: 77"
    assert rows(out)[0]["seed"] == "77"
    status, out, err = run(capsys, "simulate", "--n", "3", "--m", "5", "--trials", "100", "--seed", "5")
    assert "seed: 5" in err


def test_simulate_requires_trials(capsys):
    status, _, err = run(capsys, "simulate", "--n", "3", "--m", "5")
    assert status == 1 and "trials" in err


def test_sweep_preset_file(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    status, _, _ = run(capsys, "sweep", "--preset", "fig4", "--out", str(out))
    assert status == 0
    got = read_records(out)
    assert [int(r["num_users"]) for r in got] == list(range(10, 501, 10))
    assert out.read_bytes().count(b"\r") == 0


def test_sweep_custom_and_error_rows(capsys):
    status, out, _ = run(capsys, "sweep", "--param", "N", "--values", "1:4:1", "--m", "3")
    got = rows(out)
    assert status == 0 and [r["value"] for r in got] == ["1", "2", "3", "4"]
    assert got[-1]["error"] and not got[0]["error"]


def test_optimize(capsys):
    status, out, _ = run(capsys, "optimize", "--policy", "stochastic", "--n", "100", "--m", "10000",
                         "--gamma-r", "2.5", "--metric", "FD", "--format", "json")
    assert status == 0
    data = json.loads(out)
    [best] = [r for r in data if r["is_optimum"]]
    assert 1.6 <= best["gamma_c"] <= 2.0 and len(data) == 41


def test_optimize_needs_stochastic(capsys):
    status, _, err = run(capsys, "optimize", "--n", "5", "--m", "10", "--metric", "HD")
    assert status == 1


def test_validate_exit_status(capsys):
    status, out, err = run(capsys, "validate", "--policy", "stochastic", "--n", "3", "--m", "5", "--trials", "20000")
    assert status == 0 and "passed" in err
    assert all(r["passed"] == "true" for r in rows(out))


def test_usage_errors(capsys):
    assert run(capsys, "analyze", "--n", "x")[0] == 2
    assert run(capsys, "analyze", "--bogus")[0] == 2
    assert run(capsys)[0] == 2


def test_domain_error(capsys):
    status, _, err = run(capsys, "analyze", "--n", "5", "--m", "3")
    assert status == 1 and "N <= m" in err


def test_unwritable_output(capsys, tmp_path):
    status, _, err = run(capsys, "analyze", "--n", "2", "--m", "3", "--out", str(tmp_path / "missing" / "x.csv"))
    assert status == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "analyze", "policy": "deterministic", "n": 10, "m": 50, "gamma_r": 0.8}))
    config = load_config(cfg, environ={})
    assert config.seed == 42 and config.format == "csv"
    status, out, _ = run(capsys, "analyze", "--config", str(cfg), "--n", "20")
    assert status == 0 and rows(out)[0]["num_users"] == "20"


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"command": "analyze", "gamma_x": 1}')
    with pytest.raises(ConfigError, match="gamma_x"):
        load_config(bad)
    assert run(capsys, "analyze", "--config", str(bad))[0] == 2
    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "command": "analyze",\n  "n": }')
    status, _, err = run(capsys, "analyze", "--config", str(broken))
    assert status == 2 and "broken.json:3:" in err
    with pytest.raises(ConfigError):
        parse_config_text('{"n": "ten"}')
    with pytest.raises(ConfigError):
        parse_config_text("[1, 2]")


def test_env_seed():
    assert env_seed({}) == 42
    assert env_seed({"CACHEMODES_SEED": "9"}) == 9
    with pytest.raises(ConfigError):
        env_seed({"CACHEMODES_SEED": "nine"})


def test_parse_values():
    assert parse_values("10,20,30") == [10, 20, 30]
    assert parse_values("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    with pytest.raises(InvalidArgument):
        parse_values("1:2")


def test_empty_records_header_only():
    assert records_to_text([], "csv", MODE_SCHEMA) == ",".join(MODE_SCHEMA) + "\n"
    assert records_to_text([], "json", MODE_SCHEMA) == "[]\n"


def test_one_record_two_lines():
    assert records_to_text([{"schema_version": 1}], "csv", MODE_SCHEMA).count("\n") == 2


def test_unknown_record_key_rejected():
    with pytest.raises(InvalidArgument):
        records_to_text([{"nonsense": 1}], "csv", MODE_SCHEMA)
    with pytest.raises(InvalidArgument):
        records_to_text([], "xml", MODE_SCHEMA)


def test_format_value():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(True) == "true"
    assert format_value(None) == ""
    assert format_value(7) == "7"


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(tmp_path, fmt):
    values = [1 / 3, 2.0 / 7, 1e-17, 0.123456789012345, 0.999999999999]
    records = [{"schema_version": 1, "p_sr": v} for v in values]
    path = tmp_path / f"out.{fmt}"
    write_records(records, fmt, path, MODE_SCHEMA)
    back = read_records(path)
    for v, rec in zip(values, back):
        assert abs(float(rec["p_sr"]) - v) <= 1e-11 * max(1.0, abs(v))


def test_byte_identical_runs(tmp_path, capsys):
    outs = []
    for i, workers in enumerate(("1", "1", "2")):
        path = tmp_path / f"run{i}.csv"
        run(capsys, "simulate", "--policy", "stochastic", "--n", "6", "--m", "20", "--trials", "9000",
            "--seed", "5", "--workers", workers, "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]
