"""Command-line front end.

Exit codes:

==  ====================================================
0   success
2   Verilog syntax error
3   unsupported cell kind
4   connectivity error (dangling pin, undriven net, multiple drivers)
5   elaboration error (combinational loop, several clocks)
6   configuration or usage error
7   malformed IR or results file
==  ====================================================

Every failure prints exactly one ``seusim: error[<code>]: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .campaign import CampaignConfig, ErrorMatrix, resolve_threads, run_campaign
from .elaborate import elaborate
from .errors import (
    ConfigError,
    ConnectivityError,
    ElaborationError,
    SchemaError,
    UnknownCell,
    UnsupportedCell,
    VerilogSyntaxError,
)
from .faults import enumerate_faults, faults_csv
from .metrics import TotalMode, build_report, histogram_csv, report_json, table_csv
from .netlist import read_ir, write_ir
from .sim import FaultOverlay, run, trace_csv
from .stimuli import exhaustive, pseudo_random, read_stimuli, write_stimuli
from .verilog import parse_verilog

EXIT_CODES = [
    (VerilogSyntaxError, 2),
    (UnsupportedCell, 3),
    (ConnectivityError, 4),
    (ElaborationError, 5),
    (SchemaError, 7),
    (ConfigError, 6),
    (UnknownCell, 6),
]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise ConfigError(f"cannot write {path}: {e.strerror}") from None


def load_design(path, clock=None, reset=None):
    """Read a design from JSON IR or structural Verilog (sniffed from the content)."""
    text = _read(path)
    if text.lstrip().startswith("{"):
        return read_ir(text)
    return parse_verilog(text, clock=clock, reset=reset)


def _stimulus(args, num_inputs):
    if getattr(args, "stimuli_file", None):
        stim = read_stimuli(_read(args.stimuli_file))
        if stim.num_inputs != num_inputs:
            raise ConfigError(f"stimulus file has {stim.num_inputs} inputs, design has {num_inputs}")
        return stim
    if args.stimuli == "exhaustive":
        return exhaustive(num_inputs, args.cycles, hold=args.hold)
    return pseudo_random(num_inputs, args.cycles, args.runs, args.seed, hold=args.hold)


def _load_weights(path):
    if path is None:
        return None
    try:
        weights = json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise ConfigError(f"weights file {path}: {e}") from None
    if not isinstance(weights, dict):
        raise ConfigError("weights file must map output bits to numbers")
    return weights


# -- subcommands -----------------------------------------------------------

def cmd_parse(args):
    n = parse_verilog(_read(args.netlist), clock=args.clock, reset=args.reset)
    _write(args.ir, write_ir(n))
    return 0


def cmd_faults_list(args):
    _write(args.output, faults_csv(enumerate_faults(load_design(args.design))))
    return 0


def cmd_stimuli_gen(args):
    if args.inputs is None:
        if args.design is None:
            raise ConfigError("give --inputs or --design")
        args.inputs = len(load_design(args.design).data_inputs)
    _write(args.output, write_stimuli(_stimulus(args, args.inputs)))
    return 0


def cmd_campaign(args):
    started = datetime.datetime.now(datetime.timezone.utc)
    text = _read(args.design)
    n = load_design(args.design)
    g = elaborate(n)
    stim = _stimulus(args, g.num_inputs)
    weights = _load_weights(args.weights)
    threads = resolve_threads(args.threads)
    m = run_campaign(g, enumerate_faults(n), CampaignConfig(stim, stim.cycles, weights, threads))
    m.extra["config"] = {
        "design": n.name,
        "stimulus": {k: v for k, v in stim.provenance.items()},
        "runs": stim.runs,
        "cycles": stim.cycles,
        "weights": None if weights is None else {k: str(v) for k, v in weights.items()},
    }
    _write(args.output, m.to_json())
    if args.output not in (None, "-"):
        manifest = {
            "tool": "seusim",
            "version": __version__,
            "design": str(args.design),
            "design_sha256": hashlib.sha256(text.encode()).hexdigest(),
            "stimulus": stim.provenance,
            "seed": stim.provenance.get("seed"),
            "runs": stim.runs,
            "cycles": stim.cycles,
            "threads": threads,
            "started": started.isoformat(),
            "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        _write(str(args.output) + ".manifest.json", json.dumps(manifest, indent=2) + "\n")
    return 0


def cmd_report(args):
    m = ErrorMatrix.from_json(_read(args.results))
    weights = _load_weights(args.weights)
    if weights is None:
        weights = (m.extra.get("config") or {}).get("weights")
    report = build_report(m, TotalMode(args.mode), weights, args.bin_width)
    parts = []
    if args.json:
        parts.append(report_json(report))
    if args.table3 or not (args.histogram or args.json):
        parts.append(table_csv(report))
    if args.histogram:
        parts.append(histogram_csv(report))
    _write(args.output, "\n".join(parts))
    return 0


def cmd_simulate(args):
    n = load_design(args.design)
    g = elaborate(n)
    stim = _stimulus(args, g.num_inputs)
    if not 0 <= args.run < stim.runs:
        raise ConfigError(f"run {args.run} out of range (0..{stim.runs - 1})")
    trace = run(g, stim[args.run], FaultOverlay(args.fault))
    _write(args.output, trace_csv(trace, n.output_labels()))
    return 0


def _stimulus_options(p, runs_default=1024, cycles_default=10):
    p.add_argument("--stimuli", choices=["exhaustive", "random"], default="random")
    p.add_argument("--stimuli-file", help="read runs from a stimulus file instead of generating them")
    p.add_argument("--runs", type=int, default=runs_default)
    p.add_argument("--cycles", type=int, default=cycles_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hold", action="store_true", help="repeat one input vector for every cycle of a run")


def build_parser():
    p = _Parser(prog="seusim", description="Soft-error vulnerability analysis of LUT netlists.")
    p.add_argument("--version", action="version", version=f"seusim {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("parse", help="structural Verilog to JSON IR")
    sp.add_argument("netlist")
    sp.add_argument("--ir", default="-", help="output path (default stdout)")
    sp.add_argument("--clock")
    sp.add_argument("--reset")
    sp.set_defaults(func=cmd_parse)

    fp = sub.add_parser("faults", help="fault universe")
    fsub = fp.add_subparsers(dest="faults_command", required=True, parser_class=_Parser)
    fl = fsub.add_parser("list", help="print index,cell_id,kind")
    fl.add_argument("design")
    fl.add_argument("-o", "--output", default="-")
    fl.set_defaults(func=cmd_faults_list)

    stp = sub.add_parser("stimuli", help="stimulus files")
    ssub = stp.add_subparsers(dest="stimuli_command", required=True, parser_class=_Parser)
    sg = ssub.add_parser("gen", help="generate a stimulus file")
    sg.add_argument("--inputs", type=int)
    sg.add_argument("--design")
    _stimulus_options(sg)
    sg.add_argument("-o", "--output", default="-")
    sg.set_defaults(func=cmd_stimuli_gen)

    cp = sub.add_parser("campaign", help="run the fault-injection campaign")
    cp.add_argument("design", help="JSON IR or structural Verilog")
    _stimulus_options(cp)
    cp.add_argument("--weights", help="JSON map of output bit -> weight")
    cp.add_argument("--threads", default="auto")
    cp.add_argument("-o", "--output", default="-")
    cp.set_defaults(func=cmd_campaign)

    rp = sub.add_parser("report", help="possibility table and score histogram from results")
    rp.add_argument("results")
    rp.add_argument("--mode", choices=[m.value for m in TotalMode], default="at-least-once")
    rp.add_argument("--bin-width", default="0.1")
    rp.add_argument("--weights")
    rp.add_argument("--table3", action="store_true", help="per-cycle table (default)")
    rp.add_argument("--histogram", action="store_true")
    rp.add_argument("--json", action="store_true", help="full JSON report")
    rp.add_argument("-o", "--output", default="-")
    rp.set_defaults(func=cmd_report)

    mp = sub.add_parser("simulate", help="dump one output trace as CSV")
    mp.add_argument("design")
    _stimulus_options(mp, runs_default=1)
    mp.add_argument("--run", type=int, default=0, help="which run of the stimulus set")
    mp.add_argument("--fault", help="LUT cell id to invert")
    mp.add_argument("-o", "--output", default="-")
    mp.set_defaults(func=cmd_simulate)
    return p


def _fail(code, msg):
    sys.stderr.write(f"seusim: error[{code}]: {' '.join(str(msg).split())}\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "bin_width", None) is not None:
            try:
                args.bin_width = Fraction(args.bin_width)
            except ValueError:
                raise ConfigError(f"bad bin width {args.bin_width!r}") from None
            if not 0 < args.bin_width <= 1:
                raise ConfigError("bin width must be in (0, 1]")
        return args.func(args)
    except _UsageError as e:
        return _fail(6, f"usage: {e}")
    except Exception as e:
        for cls, code in EXIT_CODES:
            if isinstance(e, cls):
                return _fail(code, f"{type(e).__name__}: {e}")
        if isinstance(e, ValueError):
            return _fail(6, f"{type(e).__name__}: {e}")
        raise


if __name__ == "__main__":
    sys.exit(main())
