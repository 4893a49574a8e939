import functools
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import seusim
import seusim.campaign
import seusim.cli
from seusim import circuits

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Every campaign run anywhere in the suite is checked for the counter invariants.
CAMPAIGNS_CHECKED = [0]
_run_campaign = seusim.campaign.run_campaign


@functools.wraps(_run_campaign)
def _checked_run_campaign(*args, **kwargs):
    m = _run_campaign(*args, **kwargs)
    assert (m.counts >= 0).all() and (m.counts <= m.runs).all()
    assert (m.any_error >= 0).all() and (m.any_error <= m.runs).all()
    if m.cycles and m.counts.size:
        assert (m.any_error >= m.counts.max(axis=2)).all(), "any_error below a per-cycle count"
    CAMPAIGNS_CHECKED[0] += 1
    return m


for _mod in (seusim.campaign, seusim.cli, seusim):
    _mod.run_campaign = _checked_run_campaign


@pytest.fixture(autouse=True)
def _no_thread_env(monkeypatch):
    # campaigns in tests pick thread counts explicitly
    monkeypatch.delenv("SEUSIM_THREADS", raising=False)


@pytest.fixture
def xor_verilog():
    return """
// two-input xor
`timescale 1ns / 1ps
module xor_top (a, b, y);
  input a;
  input b;
  output y;
  (* SOFT_HLUTNM = "soft_lutpair0" *)
  LUT2 #(.INIT(4'h6)) x (.I0(a), .I1(b), .O(y));
endmodule
"""


@pytest.fixture
def b01():
    return circuits.b01()


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's verdict; it is echoed in the terminal summary."""
    log = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, title, ok, detail=""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        log.append(line)
        assert ok, line

    return record


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_report_header(config):
    return f"cpu_count={os.cpu_count()} numpy={np.__version__}"


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
