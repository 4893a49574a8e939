"""Cycle-accurate two-phase simulation of an :class:`~seusim.elaborate.EvalGraph`.

Every cycle first drives the inputs and the flip-flop outputs, evaluates all
combinational cells once in topological order and samples the outputs; only
then do the flip-flops latch. Outputs are therefore observed in the same
cycle their inputs are applied.

A :class:`FaultOverlay` complements the result of one LUT during evaluation,
which is equivalent to simulating a copy of the netlist whose INIT mask is
inverted (see :func:`seusim.faults.apply_fault`).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .elaborate import EvalGraph
from .errors import ArityMismatch, UnknownCell


@dataclass(frozen=True)
class FaultOverlay:
    target: str | None = None

    def row(self, g: EvalGraph) -> int:
        if self.target is None:
            return -1
        try:
            return g.lut_index[self.target]
        except KeyError:
            raise UnknownCell(self.target) from None


NO_FAULT = FaultOverlay()


@dataclass(frozen=True)
class SimState:
    net_values: np.ndarray  # uint8 [n_slots]
    reg_values: np.ndarray  # uint8 [n_regs]
    cycle: int = 0


def pack_runs(bits: np.ndarray) -> np.ndarray:
    """``uint8[runs, cycles, n]`` bit matrices to ``uint64[cycles, n, W]`` words."""
    runs, cycles, n = bits.shape
    words = max(1, -(-runs // 64))
    padded = np.zeros((cycles, n, words * 64), dtype=np.uint8)
    padded[:, :, :runs] = bits.transpose(1, 2, 0)
    return np.packbits(padded, axis=-1, bitorder="little").view("<u8").astype(np.uint64)


def unpack_runs(words: np.ndarray, runs: int) -> np.ndarray:
    """Inverse of :func:`pack_runs`."""
    cycles, n, _ = words.shape
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(raw, axis=-1, bitorder="little")[:, :, :runs]
    return bits.transpose(2, 0, 1).copy()


def valid_mask(runs: int) -> np.ndarray:
    words = max(1, -(-runs // 64))
    mask = np.full(words, 0xFFFFFFFFFFFFFFFF, dtype=np.uint64)
    if runs % 64:
        mask[-1] = np.uint64((1 << (runs % 64)) - 1)
    if runs == 0:
        mask[:] = 0
    return mask


def simulate_packed(g: EvalGraph, stim: np.ndarray, fault: FaultOverlay = NO_FAULT) -> np.ndarray:
    """Simulate ``64 * W`` runs at once from reset.

    :param stim: ``uint64[cycles, n_inputs, W]`` packed stimulus.
    :returns: ``uint64[cycles, n_outputs, W]`` packed output trace.
    """
    cycles, n_in, nw = stim.shape
    if n_in != g.num_inputs:
        raise ArityMismatch(g.num_inputs, n_in)
    vals = np.zeros((g.num_slots, nw), dtype=np.uint64)
    regs = np.repeat((np.uint64(0) - g.reg_init.astype(np.uint64))[:, None], nw, axis=1)
    out = np.zeros((cycles, g.num_outputs, nw), dtype=np.uint64)
    _kernels.simulate(g.ops, g.fanin, g.tables, g.reg_table, g.input_slots, g.output_slots,
                      vals, regs, np.ascontiguousarray(stim, dtype=np.uint64), fault.row(g), out)
    return out


def reset(g: EvalGraph) -> SimState:
    """State before the first cycle: flip-flops at their init values, inputs at 0."""
    vals = np.zeros((g.num_slots, 1), dtype=np.uint64)
    for reg in g.regs:
        vals[reg.q, 0] = reg.init
    buf = np.empty((64, 1), dtype=np.uint64)
    _kernels.eval_comb(g.ops, g.fanin, g.tables, vals, -1, buf)
    return SimState((vals[:, 0] & np.uint64(1)).astype(np.uint8), g.reg_init.copy(), 0)


def step(g: EvalGraph, s: SimState, inputs, fault: FaultOverlay = NO_FAULT):
    """Advance one clock cycle.

    :returns: ``(new_state, outputs)`` where ``outputs`` are sampled before
        the flip-flops latch.
    """
    inputs = np.asarray(inputs, dtype=np.uint8).reshape(-1)
    if len(inputs) != g.num_inputs:
        raise ArityMismatch(g.num_inputs, len(inputs))
    vals = s.net_values.astype(np.uint64).reshape(-1, 1)
    regs = s.reg_values.astype(np.uint64).reshape(-1, 1)
    stim = inputs.astype(np.uint64).reshape(1, -1, 1)
    out = np.zeros((1, g.num_outputs, 1), dtype=np.uint64)
    _kernels.simulate(g.ops, g.fanin, g.tables, g.reg_table, g.input_slots, g.output_slots,
                      vals, regs, stim, fault.row(g), out)
    one = np.uint64(1)
    new = SimState((vals[:, 0] & one).astype(np.uint8), (regs[:, 0] & one).astype(np.uint8),
                   s.cycle + 1)
    return new, (out[0, :, 0] & one).astype(np.uint8)


def run(g: EvalGraph, stim, fault: FaultOverlay = NO_FAULT) -> np.ndarray:
    """Simulate one stimulus run from reset.

    :param stim: ``[cycles, n_inputs]`` 0/1 matrix (a ``StimulusRun`` also works).
    :returns: trace of shape ``[cycles, n_outputs]``, dtype uint8.
    """
    bits = np.asarray(getattr(stim, "bits", stim), dtype=np.uint8)
    if bits.ndim != 2 or bits.shape[0] < 1:
        raise ValueError("a stimulus run needs at least one cycle")
    if bits.shape[1] != g.num_inputs:
        raise ArityMismatch(g.num_inputs, bits.shape[1])
    out = simulate_packed(g, pack_runs(bits[None]), fault)
    return unpack_runs(out, 1)[0]


def run_many(g: EvalGraph, bits: np.ndarray, fault: FaultOverlay = NO_FAULT) -> np.ndarray:
    """Simulate a batch of runs, ``uint8[runs, cycles, n_in]`` -> ``uint8[runs, cycles, n_out]``."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[2] != g.num_inputs:
        raise ArityMismatch(g.num_inputs, bits.shape[2])
    return unpack_runs(simulate_packed(g, pack_runs(bits), fault), bits.shape[0])


def trace_csv(trace: np.ndarray, labels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cycle", *labels])
    for t, row in enumerate(trace):
        w.writerow([t, *(int(v) for v in row)])
    return buf.getvalue()
