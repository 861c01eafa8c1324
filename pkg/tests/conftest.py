"""Shared test helpers and the acceptance-suite summary hook."""

import re

import numpy as np
import pytest

from vortexlab.dynamics import VortexSystem


def well_separated_system(rng, n, min_sep=1.0, box=2.5, mixed_signs=True):
    """Random system with every pair at least ``min_sep`` apart."""
    while True:
        x = rng.uniform(-box, box, (n, 2))
        d = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=2)
        if np.min(d[np.triu_indices(n, k=1)]) >= min_sep:
            break
    a = rng.uniform(0.5, 1.5, n)
    if mixed_signs:
        a = a * rng.choice([-1.0, 1.0], n)
    return VortexSystem(a, x)


_CRITERION = re.compile(r"test_c(\d+)_")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            m = _CRITERION.search(nodeid)
            if not m:
                continue
            num = int(m.group(1))
            name = nodeid.split("::")[-1]
            status = "PASS" if outcome == "passed" else "FAIL"
            lines[num] = f"criterion {num:2d} {status}  {name}"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])


@pytest.fixture
def rng():
    return np.random.default_rng(0)
