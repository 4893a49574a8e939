"""Levelization of a netlist into a per-cycle evaluation schedule.

Flip-flops cut the design: their Q nets, the module inputs and constant
cells are sources, and every other combinational cell is placed after all of
its drivers. The resulting :class:`EvalGraph` also carries the flat integer
tables the simulation kernels consume.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import CombinationalLoop, MultiClock
from .netlist import Netlist, lut_width
from .verilog import clock_root

OP_LUT, OP_BUF, OP_NOT, OP_CONST0, OP_CONST1 = range(5)
_OPCODE = {"BUF": OP_BUF, "NOT": OP_NOT, "CONST0": OP_CONST0, "CONST1": OP_CONST1}
MAX_FANIN = 6


@dataclass(frozen=True)
class Reg:
    cell: str
    d: int
    q: int
    ce: int
    r: int
    init: int


@dataclass(frozen=True, eq=False)
class EvalGraph:
    """Topologically ordered evaluation schedule of one netlist.

    ``order`` lists combinational cell ids; ``ops``, ``fanin`` and ``masks``
    hold the same schedule as arrays (one row per entry of ``order``).
    ``lut_index`` maps a LUT cell id to its row.
    """

    netlist: Netlist
    order: tuple[str, ...]
    regs: tuple[Reg, ...]
    net_slots: dict
    input_slots: np.ndarray
    output_slots: np.ndarray
    lut_index: dict
    ops: np.ndarray        # int32 [n_ops, 3]: opcode, fan-in, output slot
    fanin: np.ndarray      # int32 [n_ops, MAX_FANIN]
    masks: np.ndarray      # uint64 [n_ops]
    tables: np.ndarray     # uint64 [n_ops, 64]: LUT entry m as all-zeros or all-ones
    reg_table: np.ndarray  # int32 [n_regs, 4]: d, q, ce, r slots
    reg_init: np.ndarray   # uint8 [n_regs]

    @property
    def num_inputs(self) -> int:
        return len(self.input_slots)

    @property
    def num_outputs(self) -> int:
        return len(self.output_slots)

    @property
    def num_slots(self) -> int:
        return len(self.net_slots)

    def output_labels(self) -> list[str]:
        return self.netlist.output_labels()


def _comb_order(n: Netlist) -> list[int]:
    """Kahn's algorithm; ties go to the earliest declared cell."""
    comb = [i for i, c in enumerate(n.cells) if c.kind != "DFF"]
    driver = {n.cells[i].output: i for i in comb}
    preds = {i: {driver[x] for x in n.cells[i].inputs if x in driver} for i in comb}
    succs = {i: [] for i in comb}
    for i, ps in preds.items():
        for p in ps:
            succs[p].append(i)
    indeg = {i: len(ps) for i, ps in preds.items()}
    ready = [i for i in comb if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for s in succs[i]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(ready, s)
    if len(order) != len(comb):
        left = {i for i in comb if indeg[i] > 0}
        raise CombinationalLoop([n.cells[i].id for i in _find_cycle(left, succs)])
    return order


def _find_cycle(nodes, succs) -> list[int]:
    """Return one cycle inside ``nodes`` starting from its lowest index."""
    for start in sorted(nodes):
        path, on_path = [start], {start: 0}
        stack = [iter(sorted(s for s in succs[start] if s in nodes))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                del on_path[path.pop()]
                continue
            if nxt in on_path:
                cyc = path[on_path[nxt]:]
                k = cyc.index(min(cyc))
                return cyc[k:] + cyc[:k]
            on_path[nxt] = len(path)
            path.append(nxt)
            stack.append(iter(sorted(s for s in succs[nxt] if s in nodes)))
    return sorted(nodes)  # pragma: no cover - Kahn leftovers always contain a cycle


def check_single_clock(n: Netlist) -> str | None:
    roots = {clock_root(n.cells, c.pins["C"]) for c in n.cells if c.kind == "DFF" and "C" in c.pins}
    if n.clock is not None and roots - {n.clock}:
        raise MultiClock(roots | {n.clock})
    if len(roots) > 1:
        raise MultiClock(roots)
    return next(iter(roots), n.clock)


def _expand_tables(masks):
    bits = (masks[:, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)
    return (np.uint64(0) - bits).astype(np.uint64)


def elaborate(n: Netlist) -> EvalGraph:
    """Build the evaluation schedule for ``n``.

    :raises CombinationalLoop: if the design minus its flip-flops is cyclic.
    :raises MultiClock: if the flip-flop clock pins do not share one root net.
    """
    check_single_clock(n)
    slots = {net: i for i, net in enumerate(n.nets)}
    order = _comb_order(n)

    ops = np.zeros((len(order), 3), dtype=np.int32)
    fanin = np.zeros((len(order), MAX_FANIN), dtype=np.int32)
    masks = np.zeros(len(order), dtype=np.uint64)
    lut_index = {}
    for row, i in enumerate(order):
        c = n.cells[i]
        k = lut_width(c.kind)
        ins = c.inputs
        if k:
            ops[row] = (OP_LUT, k, slots[c.output])
            masks[row] = c.init.value
            lut_index[c.id] = row
        else:
            ops[row] = (_OPCODE[c.kind], len(ins), slots[c.output])
        fanin[row, :len(ins)] = [slots[x] for x in ins]

    regs = tuple(
        Reg(c.id, slots[c.pins["D"]], slots[c.pins["Q"]], slots[c.pins["CE"]],
            slots[c.pins["R"]], c.ff_init)
        for c in n.cells if c.kind == "DFF")
    reg_table = np.array([(r.d, r.q, r.ce, r.r) for r in regs], dtype=np.int32).reshape(-1, 4)

    return EvalGraph(
        netlist=n,
        order=tuple(n.cells[i].id for i in order),
        regs=regs,
        net_slots=slots,
        input_slots=np.array([slots[p.net] for p in n.data_inputs], dtype=np.int32),
        output_slots=np.array([slots[p.net] for p in n.outputs], dtype=np.int32),
        lut_index=lut_index,
        ops=ops,
        fanin=fanin,
        masks=masks,
        tables=_expand_tables(masks),
        reg_table=reg_table,
        reg_init=np.array([r.init for r in regs], dtype=np.uint8),
    )
