import numpy as np
import pytest

from cachemodes.distributions import NetworkConfig
from cachemodes.errors import InvalidArgument
from cachemodes.experiments import (
    PRESETS,
    SweepSpec,
    compare_policies,
    evaluate,
    gamma_grid,
    optimize_gamma_c,
    preset,
    resolve_engine,
    run_sweep,
    validate,
)
from cachemodes.modes import Engine, Policy

DET, STO = Policy.DETERMINISTIC, Policy.STOCHASTIC


def test_engine_auto_selection():
    assert resolve_engine(NetworkConfig(3, 5)) is Engine.CLOSED_FORM
    assert resolve_engine(NetworkConfig(3, 7, policy=STO)) is Engine.EXACT
    assert resolve_engine(NetworkConfig(10, 500, policy=STO)) is Engine.FAST
    assert resolve_engine(NetworkConfig(3, 7, policy=STO), cap=100) is Engine.FAST
    with pytest.raises(InvalidArgument):
        resolve_engine(NetworkConfig(3, 5), "fast")
    with pytest.raises(InvalidArgument):
        resolve_engine(NetworkConfig(3, 5, policy=STO), "closed_form")


def test_evaluate_monte_carlo_needs_trials():
    with pytest.raises(InvalidArgument):
        evaluate(NetworkConfig(3, 5), Engine.MONTE_CARLO)
    modes, se = evaluate(NetworkConfig(3, 5), "mc", trials=100, seed=1)
    assert modes.provenance is Engine.MONTE_CARLO and set(se) >= {"sr", "bfd"}


def test_sweep_spec_validation():
    fixed = NetworkConfig(3, 10)
    with pytest.raises(InvalidArgument):
        SweepSpec("N", (), fixed)
    with pytest.raises(InvalidArgument):
        SweepSpec("N", (3, 2), fixed)
    with pytest.raises(InvalidArgument):
        SweepSpec("gamma_c", (0.1, 0.2), fixed)
    with pytest.raises(InvalidArgument):
        SweepSpec("policy", (1,), fixed)
    with pytest.raises(InvalidArgument):
        SweepSpec("N", (1, 2), fixed, engines=("monte_carlo",))
    assert SweepSpec("m", (10,), fixed).swept_parameter == "library_size"


def test_sweep_rows_ordered_with_errors():
    spec = SweepSpec("N", (2, 3, 4), NetworkConfig(2, 3), engines=(None, "mc"), trials=200, seed=5)
    result = run_sweep(spec)
    assert [(r.value, r.ok) for r in result.rows] == [(2, True), (2, True), (3, True), (3, True), (4, False), (4, False)]
    assert "N <= m" in result.rows[-1].error
    assert result.rows[1].engine is Engine.MONTE_CARLO and result.rows[1].seed == 5
    assert result.rows[0].trials is None
    for row in result.ok_rows():
        assert abs(row.modes.total() - 1) <= 1e-9


def test_single_value_sweep():
    spec = SweepSpec("gamma_r", (0.5,), NetworkConfig(3, 6, policy=STO), engines=("exact", "fast"))
    rows = run_sweep(spec).rows
    assert [r.engine for r in rows] == [Engine.EXACT, Engine.FAST]
    np.testing.assert_allclose(rows[0].modes.values(), rows[1].modes.values(), atol=1e-12)


def test_sweep_records_capacity_errors():
    spec = SweepSpec("N", (2, 5), NetworkConfig(1, 20, policy=STO), engines=("exact",))
    rows = run_sweep(spec, cap=1000).rows
    assert rows[0].ok and not rows[1].ok


def test_curve():
    spec = SweepSpec("N", (10, 20, 30), NetworkConfig(10, 500, 0.8, 1.6, STO), engines=("fast",))
    curve = run_sweep(spec).curve("p_fdtr")
    assert [v for v, _ in curve] == [10, 20, 30]
    assert curve[0][1] < curve[-1][1]
    assert run_sweep(spec).curve("hd")[0][1] > 0


def test_compare_policies():
    [cmp] = compare_policies([NetworkConfig(200, 500, 0.8, 1.6)])
    assert cmp.deterministic.provenance is Engine.CLOSED_FORM and cmp.stochastic.provenance is Engine.FAST
    assert cmp.deltas["ho"] == pytest.approx(cmp.stochastic.p_ho - cmp.deterministic.p_ho)
    assert cmp.deltas["hd"] == pytest.approx(cmp.stoch_aggregates.p_hd - cmp.det_aggregates.p_hd)
    # Requests nobody can serve (HDTX + HO) are far more common with random caching.
    miss = lambda m: m.p_hdtx + m.p_ho
    assert miss(cmp.stochastic) > miss(cmp.deterministic)
    [single] = compare_policies([NetworkConfig(1, 5, 0.8, 1.6)])
    assert single.deterministic.p_fdtr == single.stochastic.p_fdtr == 0.0
    [bad] = compare_policies([NetworkConfig(6, 5, 0.8, 1.6, STO)])
    assert bad.error and bad.deterministic is None


def test_gamma_grid():
    assert gamma_grid(0, 0.3, 0.1) == [0.0, 0.1, 0.2, 0.3]
    assert len(gamma_grid(0, 4, 0.1)) == 41
    with pytest.raises(InvalidArgument):
        gamma_grid(1, 0, 0.1)


def test_optimize_tie_break_and_boundary():
    fixed = NetworkConfig(1, 50, 0.8, 0.0, STO)
    # With one user every link-based metric is zero: a full tie.
    opt = optimize_gamma_c("FD", [0.0, 0.5, 1.0], fixed)
    assert opt.gamma_c == 0.0 and opt.value == 0.0 and opt.at_boundary
    assert len(opt.curve) == 3


def test_optimize_interior():
    fixed = NetworkConfig(100, 10_000, 2.5, 0.0, STO)
    opt = optimize_gamma_c("hd", gamma_grid(0, 4, 0.1), fixed)
    assert opt.metric == "HD" and 0.6 <= opt.gamma_c <= 1.0 and not opt.at_boundary
    assert opt.value == max(v for _, v in opt.curve)


def test_optimize_rejects_bad_input():
    sto = NetworkConfig(3, 10, policy=STO)
    with pytest.raises(InvalidArgument):
        optimize_gamma_c("XX", [0, 1], sto)
    with pytest.raises(InvalidArgument):
        optimize_gamma_c("HD", [], sto)
    with pytest.raises(InvalidArgument):
        optimize_gamma_c("HD", [1, 0], sto)
    with pytest.raises(InvalidArgument):
        optimize_gamma_c("HD", [0, 1], NetworkConfig(3, 10))


def test_validate_stochastic_small():
    report = validate(NetworkConfig(5, 7, 0.8, 1.6, STO), trials=20000, seed=42)
    assert report.passed
    cross = [e for e in report.entries if e.reference is Engine.EXACT]
    assert len(cross) == 6 and max(abs(e.delta) for e in cross) < 1e-10


def test_validate_deterministic_includes_split():
    report = validate(NetworkConfig(20, 100, 0.8), trials=20000, seed=1)
    assert {e.mode for e in report.entries} >= {"bfd", "tnfd"}
    assert report.passed


def test_validate_single_user():
    report = validate(NetworkConfig(1, 8, 0.8, 1.6, STO), trials=2000, seed=3)
    for e in report.entries:
        if e.reference is Engine.EXACT:
            assert abs(e.delta) <= 1e-12


def test_presets_available():
    assert set(PRESETS) == {"fig2", "fig3", "fig4", "fig5", "fig6"}
    with pytest.raises(InvalidArgument):
        preset("fig9")
    assert preset("FIG4")[0].fixed.library_size == 500
