"""Event-driven reference simulator.

Works on a :class:`~seusim.netlist.Netlist` directly, one run at a time,
propagating value changes through fan-out lists until nothing changes
(fixed point). It shares no code with the levelized engine and serves as an
oracle for it and as the baseline in speed comparisons. Faults are
simulated on edited netlists (:func:`seusim.faults.apply_fault`).
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .faults import apply_fault
from .netlist import Netlist


class OscillationError(RuntimeError):
    pass


class EventSim:
    def __init__(self, n: Netlist):
        self.netlist = n
        idx = {net: i for i, net in enumerate(n.nets)}
        self.n_nets = len(idx)
        self.cells = []   # (kind, input indices, output index, init value)
        self.dffs = []    # (d, q, ce, r, init)
        for c in n.cells:
            if c.kind == "DFF":
                p = c.pins
                self.dffs.append((idx[p["D"]], idx[p["Q"]], idx[p["CE"]], idx[p["R"]], c.ff_init))
            else:
                init = c.init.value if c.init is not None else 0
                self.cells.append((c.kind, tuple(idx[x] for x in c.inputs), idx[c.output], init))
        self.fanout = [[] for _ in range(self.n_nets)]
        for ci, (_, ins, _, _) in enumerate(self.cells):
            for i in set(ins):
                self.fanout[i].append(ci)
        self.inputs = [idx[p.net] for p in n.data_inputs]
        self.held = [idx[x] for x in (n.clock, n.reset) if x is not None]
        self.outputs = [idx[p.net] for p in n.outputs]
        self.limit = 64 * (len(self.cells) + 1) ** 2

    def _eval(self, cell, v):
        kind, ins, _, init = cell
        if kind == "BUF":
            return v[ins[0]]
        if kind == "NOT":
            return 1 - v[ins[0]]
        if kind == "CONST0":
            return 0
        if kind == "CONST1":
            return 1
        sel = 0
        for j, i in enumerate(ins):
            sel |= v[i] << j
        return (init >> sel) & 1

    def _settle(self, v, queue, queued):
        evals = 0
        while queue:
            ci = queue.popleft()
            queued[ci] = False
            cell = self.cells[ci]
            new = self._eval(cell, v)
            evals += 1
            if evals > self.limit:
                raise OscillationError("combinational logic did not settle")
            out = cell[2]
            if v[out] != new:
                v[out] = new
                for f in self.fanout[out]:
                    if not queued[f]:
                        queued[f] = True
                        queue.append(f)

    def run(self, stim) -> np.ndarray:
        """Simulate one run; ``stim`` is ``[cycles, n_inputs]``, returns ``[cycles, n_outputs]``."""
        stim = np.asarray(stim, dtype=np.uint8).tolist()
        v = [0] * self.n_nets
        regs = [d[4] for d in self.dffs]
        queued = [True] * len(self.cells)
        queue = deque(range(len(self.cells)))
        trace = []
        for vec in stim:
            changed = []
            for net, bit in zip(self.inputs, vec):
                if v[net] != bit:
                    v[net] = bit
                    changed.append(net)
            for (_, q, _, _, _), val in zip(self.dffs, regs):
                if v[q] != val:
                    v[q] = val
                    changed.append(q)
            for net in changed:
                for f in self.fanout[net]:
                    if not queued[f]:
                        queued[f] = True
                        queue.append(f)
            self._settle(v, queue, queued)
            trace.append([v[o] for o in self.outputs])
            regs = [0 if v[r] else (v[d] if v[ce] else old)
                    for (d, _, ce, r, _), old in zip(self.dffs, regs)]
        return np.array(trace, dtype=np.uint8).reshape(len(stim), len(self.outputs))


def simulate(n: Netlist, stim) -> np.ndarray:
    return EventSim(n).run(stim)


def reference_counts(n: Netlist, faults, bits: np.ndarray):
    """Mismatch counters computed run by run with the event-driven simulator.

    :param faults: LUT cell ids (or fault specs) to inject, one at a time.
    :param bits: ``uint8[runs, cycles, n_inputs]``.
    :returns: ``(counts[f, b, c], any_error[f, b])`` as int64 arrays.
    """
    golden_sim = EventSim(n)
    golden = [golden_sim.run(r) for r in bits]
    runs, cycles = bits.shape[:2]
    n_out = len(n.outputs)
    counts = np.zeros((len(faults), n_out, cycles), dtype=np.int64)
    any_error = np.zeros((len(faults), n_out), dtype=np.int64)
    for fi, f in enumerate(faults):
        sim = EventSim(apply_fault(n, f))
        for r in range(runs):
            diff = sim.run(bits[r]) != golden[r]
            counts[fi] += diff.T
            any_error[fi] += diff.any(axis=0)
    return counts, any_error
