import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seusim import circuits, reference
from seusim.elaborate import elaborate
from seusim.errors import ArityMismatch, UnknownCell
from seusim.faults import apply_fault
from seusim.sim import (NO_FAULT, FaultOverlay, pack_runs, reset, run, run_many, step,
                        trace_csv, unpack_runs)
from seusim.stimuli import exhaustive, pseudo_random
from seusim.verilog import parse_verilog


def _const_out():
    return parse_verilog("""module k(output y);
  wire v;
  VCC one (.P(v));
  OBUF ob (.I(v), .O(y));
endmodule""")


@pytest.mark.parametrize("init", [0, 1])
def test_reset_loads_dff_init(init):
    n = parse_verilog(f"""module m(input c, input d, output q);
  FDRE #(.INIT(1'b{init})) r (.C(c), .CE(1'b1), .R(1'b0), .D(d), .Q(q));
endmodule""")
    s = reset(elaborate(n))
    assert s.reg_values.tolist() == [init]
    assert s.cycle == 0


def test_reset_settles_constants():
    g = elaborate(_const_out())
    s = reset(g)
    assert s.net_values[g.output_slots[0]] == 1


def test_xor_step_with_and_without_fault():
    g = elaborate(circuits.xor2())
    s = reset(g)
    _, out = step(g, s, [1, 0])
    assert out.tolist() == [1]
    _, out = step(g, s, [1, 0], FaultOverlay("x"))
    assert out.tolist() == [0]


def test_step_counts_cycles_and_checks_arity():
    g = elaborate(circuits.xor2())
    s1, _ = step(g, reset(g), [0, 0])
    s2, _ = step(g, s1, [0, 1])
    assert (s1.cycle, s2.cycle) == (1, 2)
    with pytest.raises(ArityMismatch):
        step(g, s2, [1])


def test_pipeline_latency_is_one_cycle():
    g = elaborate(circuits.pipeline())
    trace = run(g, np.array([[1], [0], [0], [1], [1]]))
    assert trace[:, 0].tolist() == [0, 1, 0, 0, 1]


def _counter_oracle(cycles):
    """Brute-force next-state table built from the counter's own LUT masks."""
    n = circuits.counter2()
    inc0, inc1 = n.cell("inc0").init, n.cell("inc1").init
    table = {(q1, q0): (inc1.lookup([q0, q1]), inc0.lookup([q0])) for q1 in (0, 1) for q0 in (0, 1)}
    state = (n.cell("r1").ff_init, n.cell("r0").ff_init)
    out = []
    for _ in range(cycles):
        out.append(state)
        state = table[state]
    return out


def test_counter_counts():
    g = elaborate(circuits.counter2())
    s = reset(g)
    seen = []
    for _ in range(4):
        s, out = step(g, s, [])
        seen.append(tuple(out.tolist()))
    assert seen == _counter_oracle(4)
    assert seen == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_run_is_fold_of_step():
    n = circuits.random_netlist(3)
    g = elaborate(n)
    stim = pseudo_random(g.num_inputs, 12, 1, seed=5)[0]
    s, rows = reset(g), []
    for vec in stim.bits:
        s, out = step(g, s, vec)
        rows.append(out)
    assert np.array_equal(run(g, stim), np.array(rows))
    assert np.array_equal(run(g, stim), run(g, stim))


def test_b01_output_lut_fault_differs_every_cycle(b01):
    g = elaborate(b01)
    stim = exhaustive(g.num_inputs, 4)
    outp = g.output_labels().index("outp")
    golden = run_many(g, stim.bits)
    faulty = run_many(g, stim.bits, FaultOverlay("outp_i_1"))
    assert (golden[:, :, outp] != faulty[:, :, outp]).all()


def test_masked_fault_trace_equals_golden():
    g = elaborate(circuits.reconvergent())
    stim = exhaustive(g.num_inputs, 3)
    assert np.array_equal(run_many(g, stim.bits), run_many(g, stim.bits, FaultOverlay("fan")))


def test_unknown_fault_target():
    g = elaborate(circuits.counter2())
    with pytest.raises(UnknownCell):
        run(g, np.zeros((2, 0), dtype=np.uint8), FaultOverlay("r0"))


def test_two_phase_purity_shift_register():
    # q1 <= q0 <= d: a value needs two clock edges to reach q1
    n = parse_verilog("""module sr(input c, input d, output q0, output q1);
  FDRE r0 (.C(c), .CE(1'b1), .R(1'b0), .D(d), .Q(q0));
  FDRE r1 (.C(c), .CE(1'b1), .R(1'b0), .D(q0), .Q(q1));
endmodule""")
    trace = run(elaborate(n), np.array([[1], [0], [0], [0]]))
    assert trace.tolist() == [[0, 0], [1, 0], [0, 1], [0, 0]]


def test_clock_enable_and_reset_priority():
    n = parse_verilog("""module m(input c, input d, input ce, input r, output q);
  FDRE #(.INIT(1'b1)) f (.C(c), .CE(ce), .R(r), .D(d), .Q(q));
endmodule""")
    g = elaborate(n)
    # columns: d, ce, r
    stim = np.array([[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 1], [1, 1, 0], [0, 0, 0]])
    assert run(g, stim)[:, 0].tolist() == [1, 1, 0, 0, 0, 1]


@given(st.integers(0, 10_000))
def test_no_fault_overlay_is_identity(seed):
    g = elaborate(circuits.random_netlist(seed))
    bits = pseudo_random(g.num_inputs, 6, 70, seed).bits
    assert np.array_equal(run_many(g, bits, FaultOverlay(None)), run_many(g, bits))


@given(st.integers(0, 10_000))
def test_overlay_matches_edited_netlist(seed):
    n = circuits.random_netlist(seed)
    g = elaborate(n)
    bits = pseudo_random(g.num_inputs, 6, 40, seed).bits
    for lut in n.luts:
        edited = elaborate(apply_fault(n, lut.id))
        assert np.array_equal(run_many(g, bits, FaultOverlay(lut.id)), run_many(edited, bits))


@given(st.integers(0, 10_000))
def test_engine_matches_event_driven_reference(seed):
    n = circuits.random_netlist(seed)
    g = elaborate(n)
    bits = pseudo_random(g.num_inputs, 8, 20, seed).bits
    got = run_many(g, bits)
    for r in range(len(bits)):
        assert np.array_equal(got[r], reference.simulate(n, bits[r]))


@given(st.integers(1, 200), st.integers(1, 4), st.integers(0, 3))
def test_pack_unpack_round_trip(runs, cycles, n):
    bits = np.random.default_rng(runs).integers(0, 2, size=(runs, cycles, n), dtype=np.uint8)
    assert np.array_equal(unpack_runs(pack_runs(bits), runs), bits)


def test_concurrent_runs_share_one_graph():
    g = elaborate(circuits.synthetic(100, seed=2, n_inputs=8, n_outputs=8))
    bits = pseudo_random(g.num_inputs, 10, 256, seed=1).bits
    expect = run_many(g, bits, FaultOverlay("lut7"))
    results = [None] * 8

    def work(i):
        results[i] = run_many(g, bits, FaultOverlay("lut7"))

    threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(np.array_equal(r, expect) for r in results)


def test_trace_csv():
    g = elaborate(circuits.counter2())
    text = trace_csv(run(g, np.zeros((3, 0), dtype=np.uint8), NO_FAULT), g.output_labels())
    assert text == "cycle,q1,q0\n0,0,0\n1,0,1\n2,1,0\n"
