import pytest

from cachemodes.errors import InvalidArgument
from cachemodes.modes import Engine, ModeProbabilities, Policy


def make(*values, **kw):
    return ModeProbabilities(*values, policy=Policy.STOCHASTIC, provenance=Engine.FAST, **kw)


def test_rejects_bad_sum():
    with pytest.raises(InvalidArgument):
        make(0.5, 0.5, 0.5, 0, 0, 0)


def test_rejects_out_of_range():
    with pytest.raises(InvalidArgument):
        make(1.2, -0.2, 0, 0, 0, 0)


def test_split_must_match_fdtr():
    with pytest.raises(InvalidArgument):
        make(0.5, 0, 0.5, 0, 0, 0, p_bfd=0.1, p_tnfd=0.1)
    with pytest.raises(InvalidArgument):
        make(0.5, 0, 0.5, 0, 0, 0, p_bfd=0.5)
    assert make(0.5, 0, 0.5, 0, 0, 0).with_split(0.2, 0.3).has_split


@pytest.mark.parametrize("text, policy", [("d", Policy.DETERMINISTIC), ("Stochastic", Policy.STOCHASTIC)])
def test_policy_parse(text, policy):
    assert Policy.parse(text) is policy


@pytest.mark.parametrize("text, engine", [("mc", Engine.MONTE_CARLO), ("exact", Engine.EXACT), ("closed", Engine.CLOSED_FORM)])
def test_engine_parse(text, engine):
    assert Engine.parse(text) is engine


def test_parse_unknown():
    with pytest.raises(InvalidArgument):
        Policy.parse("random")
    with pytest.raises(InvalidArgument):
        Engine.parse("magic")
