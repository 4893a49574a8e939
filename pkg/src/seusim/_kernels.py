"""Bit-parallel simulation kernels.

Signal values are stored as ``uint64[n_slots, W]``: bit ``r % 64`` of word
``r // 64`` belongs to simulation run ``r``. All kernels release the GIL.
"""

import numba
import numpy as np

from .elaborate import OP_BUF, OP_CONST0, OP_CONST1, OP_LUT, OP_NOT

ALL = np.uint64(0xFFFFFFFFFFFFFFFF)
ZERO = np.uint64(0)

_jit = numba.njit(nogil=True, cache=True)


@numba.njit(nogil=True, cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@_jit
def eval_comb(ops, fanin, tables, vals, fault_row, buf):
    """Evaluate every scheduled cell once, in order.

    ``buf`` is scratch space of shape ``(64, W)``. The LUT in row
    ``fault_row`` (``-1`` for none) has its result complemented.
    """
    nw = vals.shape[1]
    for row in range(ops.shape[0]):
        op = ops[row, 0]
        k = ops[row, 1]
        o = ops[row, 2]
        if op == OP_LUT:
            size = 1 << k
            for e in range(size):
                t = tables[row, e]
                for w in range(nw):
                    buf[e, w] = t
            # Shannon expansion, highest input first
            half = size
            for j in range(k - 1, -1, -1):
                x = fanin[row, j]
                half >>= 1
                for e in range(half):
                    for w in range(nw):
                        v = vals[x, w]
                        buf[e, w] = (buf[e, w] & ~v) | (buf[e + half, w] & v)
            if row == fault_row:
                for w in range(nw):
                    vals[o, w] = ~buf[0, w]
            else:
                for w in range(nw):
                    vals[o, w] = buf[0, w]
        elif op == OP_BUF:
            i = fanin[row, 0]
            for w in range(nw):
                vals[o, w] = vals[i, w]
        elif op == OP_NOT:
            i = fanin[row, 0]
            for w in range(nw):
                vals[o, w] = ~vals[i, w]
        elif op == OP_CONST0:
            for w in range(nw):
                vals[o, w] = ZERO
        elif op == OP_CONST1:
            for w in range(nw):
                vals[o, w] = ALL


@_jit
def latch(reg_table, vals, regs):
    nw = vals.shape[1]
    for j in range(reg_table.shape[0]):
        d = reg_table[j, 0]
        ce = reg_table[j, 2]
        r = reg_table[j, 3]
        for w in range(nw):
            en = vals[ce, w]
            regs[j, w] = ~vals[r, w] & ((en & vals[d, w]) | (~en & regs[j, w]))


@_jit
def _apply(reg_table, in_slots, vals, regs, stim_t):
    nw = vals.shape[1]
    for i in range(in_slots.shape[0]):
        s = in_slots[i]
        for w in range(nw):
            vals[s, w] = stim_t[i, w]
    for j in range(reg_table.shape[0]):
        q = reg_table[j, 1]
        for w in range(nw):
            vals[q, w] = regs[j, w]


@_jit
def simulate(ops, fanin, tables, reg_table, in_slots, out_slots, vals, regs, stim, fault_row, out):
    """Run ``stim.shape[0]`` cycles from the state in ``vals``/``regs`` (updated in place).

    ``stim`` is ``uint64[cycles, n_in, W]``; sampled outputs go to ``out``
    (``uint64[cycles, n_out, W]``).
    """
    nw = vals.shape[1]
    buf = np.empty((64, nw), dtype=np.uint64)
    for t in range(stim.shape[0]):
        _apply(reg_table, in_slots, vals, regs, stim[t])
        eval_comb(ops, fanin, tables, vals, fault_row, buf)
        for b in range(out_slots.shape[0]):
            s = out_slots[b]
            for w in range(nw):
                out[t, b, w] = vals[s, w]
        latch(reg_table, vals, regs)


@_jit
def fault_counts(ops, fanin, tables, reg_table, reg_init, in_slots, out_slots, n_slots,
                 stim, fault_row, golden, valid, counts, any_error):
    """Simulate one faulty copy and accumulate mismatches against ``golden``.

    ``counts[b, t]`` gains the number of valid runs whose output ``b``
    differs at cycle ``t``; ``any_error[b]`` gains the number that differ at
    ``b`` in at least one cycle.
    """
    cycles = stim.shape[0]
    nw = stim.shape[2]
    n_out = out_slots.shape[0]
    vals = np.zeros((n_slots, nw), dtype=np.uint64)
    regs = np.empty((reg_table.shape[0], nw), dtype=np.uint64)
    for j in range(reg_table.shape[0]):
        for w in range(nw):
            regs[j, w] = ALL if reg_init[j] else ZERO
    buf = np.empty((64, nw), dtype=np.uint64)
    seen = np.zeros((n_out, nw), dtype=np.uint64)
    for t in range(cycles):
        _apply(reg_table, in_slots, vals, regs, stim[t])
        eval_comb(ops, fanin, tables, vals, fault_row, buf)
        for b in range(n_out):
            s = out_slots[b]
            c = ZERO
            for w in range(nw):
                diff = (vals[s, w] ^ golden[t, b, w]) & valid[w]
                seen[b, w] |= diff
                c += _popcount(diff)
            counts[b, t] += np.int64(c)
        latch(reg_table, vals, regs)
    for b in range(n_out):
        c = ZERO
        for w in range(nw):
            c += _popcount(seen[b, w])
        any_error[b] += np.int64(c)
