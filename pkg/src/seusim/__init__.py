"""Cycle-accurate soft-error vulnerability analysis for LUT-based netlists.

Typical flow::

    from seusim import parse_verilog, elaborate, enumerate_faults, pseudo_random
    from seusim import CampaignConfig, run_campaign, build_report

    n = parse_verilog(open("design.v").read())
    g = elaborate(n)
    stim = pseudo_random(g.num_inputs, cycles=10, runs=1024, seed=1)
    m = run_campaign(g, enumerate_faults(n), CampaignConfig(stim))
    report = build_report(m)
"""

from .campaign import CampaignConfig, ErrorMatrix, golden_trace_cache, run_campaign
from .elaborate import EvalGraph, elaborate
from .errors import *  # noqa: F401,F403
from .faults import FaultSpec, FaultUniverse, apply_fault, enumerate_faults
from .metrics import (
    Ratios,
    TotalMode,
    VulnReport,
    build_report,
    error_possibility,
    histogram,
    total_metric,
    vulnerability_scores,
)
from .netlist import Cell, InitMask, Netlist, PortBit, read_ir, write_ir
from .sim import FaultOverlay, SimState, reset, run, step
from .stimuli import StimulusRun, StimulusSet, exhaustive, pseudo_random, read_stimuli, write_stimuli
from .verilog import parse_verilog

__version__ = "0.1.0"
