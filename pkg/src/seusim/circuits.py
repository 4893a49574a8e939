"""Small hand-built circuits and random netlist generators.

The hand-built circuits pin down known behaviour (a XOR, a 2-bit counter, a
reconvergent masking structure, a b01-equivalent FSM). The generators
produce valid random sequential netlists for property tests and for
scaling experiments.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .netlist import Cell, InitMask, Netlist, PortBit, validate
from .verilog import parse_verilog


def _lut(cid, ins, out, bits):
    mask = InitMask.from_bits(bits) if isinstance(bits, (list, tuple)) else InitMask(len(ins), bits)
    pins = {f"I{j}": net for j, net in enumerate(ins)}
    pins["O"] = out
    return Cell(cid, f"LUT{len(ins)}", pins, mask)


def _dff(cid, d, q, ce, r, init=0):
    return Cell(cid, "DFF", {"D": d, "Q": q, "CE": ce, "R": r}, ff_init=init)


def _build(name, inputs, outputs, cells):
    nets = list(dict.fromkeys([*inputs, *(c.output for c in cells)]))
    n = Netlist(name, tuple(PortBit(x, 0, x) for x in inputs),
                tuple(PortBit(o, 0, net) for o, net in outputs), tuple(nets), tuple(cells))
    validate(n)
    return n


def xor2() -> Netlist:
    """One LUT2 (INIT 4'h6) computing ``y = a ^ b``."""
    return _build("xor2", ["a", "b"], [("y", "y")], [_lut("x", ["a", "b"], "y", 0x6)])


def passthrough() -> Netlist:
    """A single input buffered to a single output, no LUTs."""
    return _build("passthrough", ["a"], [("y", "y")], [Cell("buf", "BUF", {"I": "a", "O": "y"})])


def buffer_lut() -> Netlist:
    """``y = a`` through a LUT1 buffer; its inversion is visible in every run and cycle."""
    return _build("buffer_lut", ["a"], [("y", "y")], [_lut("l", ["a"], "y", [0, 1])])


def pipeline() -> Netlist:
    """``y`` is ``a`` delayed by one flip-flop."""
    cells = [Cell("one", "CONST1", {"O": "vcc"}), Cell("zero", "CONST0", {"O": "gnd"}),
             _dff("r", "a", "y", "vcc", "gnd")]
    return _build("pipeline", ["a"], [("y", "y")], cells)


def counter2() -> Netlist:
    """Free-running 2-bit counter; outputs ``(q1, q0)``."""
    cells = [
        Cell("one", "CONST1", {"O": "vcc"}),
        Cell("zero", "CONST0", {"O": "gnd"}),
        _lut("inc0", ["q0"], "d0", [1, 0]),
        _lut("inc1", ["q0", "q1"], "d1", [0, 1, 1, 0]),
        _dff("r0", "d0", "q0", "vcc", "gnd"),
        _dff("r1", "d1", "q1", "vcc", "gnd"),
    ]
    return _build("counter2", [], [("q1", "q1"), ("q0", "q0")], cells)


def reconvergent() -> Netlist:
    """A LUT whose fault is always masked.

    ``fan = a & b`` feeds two inverting paths, ``p1 = ~(fan ^ c)`` and
    ``p2 = ~fan``, which reconverge in ``join = p1 ^ p2``. Inverting ``fan``
    flips both paths, so ``join`` never changes. ``join`` drives output ``y``
    directly and output ``z`` through a register gated with ``a``.
    """
    cells = [
        _lut("fan", ["a", "b"], "fan_o", [0, 0, 0, 1]),
        _lut("p1", ["fan_o", "c"], "p1_o", [1, 0, 0, 1]),
        _lut("p2", ["fan_o"], "p2_o", [1, 0]),
        _lut("join", ["p1_o", "p2_o"], "y", [0, 1, 1, 0]),
        Cell("one", "CONST1", {"O": "vcc"}),
        Cell("zero", "CONST0", {"O": "gnd"}),
        _dff("hold", "y", "q", "vcc", "gnd"),
        _lut("gate", ["q", "a"], "z", [0, 0, 0, 1]),
    ]
    return _build("reconvergent", ["a", "b", "c"], [("y", "y"), ("z", "z")], cells)


def cross_coupled() -> Netlist:
    """Two LUTs feeding each other with no register in between (invalid for elaboration)."""
    cells = [_lut("a", ["x", "nb"], "na", [1, 1, 1, 0]), _lut("b", ["na", "x"], "nb", [1, 1, 1, 0])]
    return _build("cross_coupled", ["x"], [("y", "na")], cells)


def b01() -> Netlist:
    """b01-equivalent FSM: inputs ``line1, line2``, outputs ``outp, overflw``.

    Five LUTs (``FSM_st[0..2]`` next-state logic, ``outp_i_1``, ``overflw_i_1``)
    and three state flip-flops, read from a vendor-style structural netlist.
    """
    text = resources.files("seusim").joinpath("data/b01.v").read_text()
    return parse_verilog(text)


def b01_verilog() -> str:
    return resources.files("seusim").joinpath("data/b01.v").read_text()


def random_netlist(seed, n_luts=8, n_dffs=4, n_inputs=4, n_outputs=3, max_k=4,
                   extras=True, shuffle=True) -> Netlist:
    """A random valid sequential netlist.

    LUT inputs only come from module inputs, flip-flop outputs, constants and
    earlier LUTs, so the combinational part is acyclic. Flip-flop D, CE and R
    pins and the outputs may tap any signal. With ``extras`` the design also
    contains BUF/NOT cells. Cell declaration order is shuffled so that it is
    not topological.
    """
    rng = np.random.default_rng(seed)
    ins = [f"i{j}" for j in range(n_inputs)]
    qs = [f"q{j}" for j in range(n_dffs)]
    cells = [Cell("vcc", "CONST1", {"O": "one"}), Cell("gnd", "CONST0", {"O": "zero"})]
    sources = ins + qs + ["one", "zero"]
    signals = list(sources)
    for j in range(n_luts):
        if extras and rng.random() < 0.15:
            kind = "BUF" if rng.random() < 0.5 else "NOT"
            cells.append(Cell(f"g{j}", kind, {"I": signals[rng.integers(len(signals))], "O": f"g{j}_o"}))
            signals.append(f"g{j}_o")
        # prefer live signals over the constants
        live = [s for s in signals if s not in ("one", "zero")] or signals
        k = int(rng.integers(1, min(max_k, len(live)) + 1)) if live else 1
        picks = list(rng.choice(len(live), size=k, replace=False))
        bits = int.from_bytes(rng.bytes(8), "little") & ((1 << (1 << k)) - 1)
        cells.append(_lut(f"l{j}", [live[p] for p in picks], f"l{j}_o", bits))
        signals.append(f"l{j}_o")
    for j in range(n_dffs):
        d = signals[rng.integers(len(signals))]
        ce = "one" if rng.random() < 0.6 else signals[rng.integers(len(signals))]
        r = "zero" if rng.random() < 0.7 else signals[rng.integers(len(signals))]
        cells.append(_dff(f"r{j}", d, qs[j], ce, r, int(rng.integers(2))))
    taps = [s for s in signals if s not in ("one", "zero")]
    outs = [(f"o{j}", taps[rng.integers(len(taps))]) for j in range(n_outputs)] if taps else []
    if shuffle:
        order = rng.permutation(len(cells))
        cells = [cells[i] for i in order]
    nets = list(dict.fromkeys([*ins, *(c.output for c in cells)]))
    n = Netlist(f"rand{seed}", tuple(PortBit(x, 0, x) for x in ins),
                tuple(PortBit(o, 0, net) for o, net in outs), tuple(nets), tuple(cells))
    validate(n)
    return n


def synthetic(n_luts=1000, seed=0, n_inputs=16, n_dffs=None, n_outputs=32, window=64) -> Netlist:
    """A large random design shaped like a mapped benchmark.

    LUTs take their inputs mostly from the ``window`` most recent signals,
    which keeps logic depth and fan-out in a realistic range. Roughly one
    flip-flop per eight LUTs unless ``n_dffs`` is given.
    """
    rng = np.random.default_rng(seed)
    n_dffs = max(1, n_luts // 8) if n_dffs is None else n_dffs
    ins = [f"in{j}" for j in range(n_inputs)]
    qs = [f"st{j}" for j in range(n_dffs)]
    sources = ins + qs
    signals = list(sources)
    cells = [Cell("vcc", "CONST1", {"O": "one"}), Cell("gnd", "CONST0", {"O": "zero"})]
    ks = rng.choice([2, 3, 4, 5, 6], size=n_luts, p=[0.2, 0.25, 0.25, 0.15, 0.15])
    for j in range(n_luts):
        k = int(min(ks[j], len(signals)))
        recent = signals[-window:]
        picks = set()
        while len(picks) < k:
            pool = sources if rng.random() < 0.25 else recent
            picks.add(pool[rng.integers(len(pool))])
        bits = int.from_bytes(rng.bytes(8), "little") & ((1 << (1 << k)) - 1)
        cells.append(_lut(f"lut{j}", sorted(picks, key=signals.index), f"n{j}", bits))
        signals.append(f"n{j}")
    luts_out = signals[len(sources):]
    for j in range(n_dffs):
        cells.append(_dff(f"st_reg{j}", luts_out[rng.integers(len(luts_out))], qs[j], "one", "zero",
                          int(rng.integers(2))))
    outs = [(f"out{j}", luts_out[-1 - j * max(1, len(luts_out) // n_outputs)])
            for j in range(min(n_outputs, len(luts_out)))]
    nets = list(dict.fromkeys([*ins, *(c.output for c in cells)]))
    n = Netlist(f"synthetic{n_luts}", tuple(PortBit(x, 0, x) for x in ins),
                tuple(PortBit(o, 0, net) for o, net in outs), tuple(nets), tuple(cells))
    validate(n)
    return n
