"""Shared oracles for the test suite.

The brute-force oracle enumerates every cache placement and request vector,
classifies users from the mode definitions directly (independently of the
package's classifiers) and weights each outcome by its probability.
"""
import itertools
import math

import numpy as np
import pytest


def zipf(m, gamma):
    w = [k ** (-gamma) for k in range(1, m + 1)]
    total = math.fsum(w)
    return [x / total for x in w]


def oracle_label(k, cached, requested):
    """Mode of 0-based user k; BFD and TNFD are reported separately."""
    others = [t for t in range(len(cached)) if t != k]
    own = requested[k] == cached[k]
    wanted = any(requested[t] == cached[k] for t in others)
    if own:
        return "sr_hdtx" if wanted else "sr"
    senders = [t for t in others if cached[t] == requested[k]]
    if senders and wanted:
        return "bfd" if any(requested[t] == cached[k] for t in senders) else "tnfd"
    if senders:
        return "hdrx"
    return "hdtx" if wanted else "ho"


def brute_force_modes(rho, mu, n, placements=None):
    """Mode probabilities averaged over users, by full joint enumeration.

    ``placements`` restricts caching to a fixed list of (placement, weight)
    pairs; the default draws each user's cache i.i.d. from ``mu``.
    """
    m = len(rho)
    if placements is None:
        placements = [
            (p, math.prod(mu[c] for c in p)) for p in itertools.product(range(m), repeat=n)
        ]
    totals = dict.fromkeys(("sr", "sr_hdtx", "bfd", "tnfd", "hdtx", "hdrx", "ho"), 0.0)
    requests = [(r, math.prod(rho[c] for c in r)) for r in itertools.product(range(m), repeat=n)]
    for cached, wc in placements:
        if wc == 0.0:
            continue
        for requested, wr in requests:
            w = wc * wr / n
            for k in range(n):
                totals[oracle_label(k, cached, requested)] += w
    totals["fdtr"] = totals["bfd"] + totals["tnfd"]
    return totals


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


# One line per acceptance criterion, filled by test_acceptance.py and
# printed at the end of the run.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
