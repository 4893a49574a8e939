import numpy as np
import pytest
from hypothesis import given, strategies as st

from seusim import circuits
from seusim.elaborate import elaborate
from seusim.errors import CombinationalLoop, MultiClock
from seusim.netlist import InitMask
from seusim.sim import SimState, step
from seusim.verilog import parse_verilog


CHAIN = """module chain(input x, output y);
  wire m;
  LUT1 #(.INIT(2'h1)) b (.I0(m), .O(y));
  LUT1 #(.INIT(2'h1)) a (.I0(x), .O(m));
endmodule"""

FEEDBACK = """module fb(input clk, input x, output y);
  wire d;
  LUT2 #(.INIT(4'h6)) l (.I0(x), .I1(y), .O(d));
  FDRE r (.C(clk), .CE(1'b1), .R(1'b0), .D(d), .Q(y));
endmodule"""


def test_chain_order():
    g = elaborate(parse_verilog(CHAIN))
    assert g.order == ("a", "b")


def test_cross_coupled_is_a_loop():
    with pytest.raises(CombinationalLoop) as e:
        elaborate(circuits.cross_coupled())
    assert e.value.cycle == ["a", "b"]


def test_loop_reported_from_lowest_declared_cell():
    text = """module m(input x, output y);
  wire p, q;
  LUT1 #(.INIT(2'h2)) u (.I0(x), .O(y));
  LUT2 #(.INIT(4'h6)) c (.I0(q), .I1(x), .O(p));
  LUT1 #(.INIT(2'h1)) d (.I0(p), .O(q));
endmodule"""
    with pytest.raises(CombinationalLoop) as e:
        elaborate(parse_verilog(text))
    assert e.value.cycle == ["c", "d"]


def test_register_cuts_feedback():
    g = elaborate(parse_verilog(FEEDBACK))
    assert "l" in g.order and "r" not in g.order
    assert [r.cell for r in g.regs] == ["r"]


def test_ties_follow_declaration_order():
    text = """module m(input a, output y, output z, output w);
  LUT1 #(.INIT(2'h1)) z1 (.I0(a), .O(z));
  LUT1 #(.INIT(2'h1)) a1 (.I0(a), .O(y));
  LUT1 #(.INIT(2'h1)) m1 (.I0(a), .O(w));
endmodule"""
    assert elaborate(parse_verilog(text)).order == ("z1", "a1", "m1")


def test_two_clocks_rejected():
    text = """module m(input c1, input c2, input d, output q1, output q2);
  FDRE r1 (.C(c1), .CE(1'b1), .R(1'b0), .D(d), .Q(q1));
  FDRE r2 (.C(c2), .CE(1'b1), .R(1'b0), .D(d), .Q(q2));
endmodule"""
    with pytest.raises(MultiClock) as e:
        elaborate(parse_verilog(text))
    assert e.value.clocks == ["c1", "c2"]


@given(st.integers(0, 10_000))
def test_graph_invariants(seed):
    n = circuits.random_netlist(seed)
    g = elaborate(n)
    comb = [c.id for c in n.cells if c.kind != "DFF"]
    assert sorted(g.order) == sorted(comb)
    pos = {cid: i for i, cid in enumerate(g.order)}
    drivers = {c.output: c.id for c in n.cells if c.kind != "DFF"}
    for cid in g.order:
        for net in n.cell(cid).inputs:
            if net in drivers:
                assert pos[drivers[net]] < pos[cid]
    assert sorted(r.cell for r in g.regs) == sorted(c.id for c in n.cells if c.kind == "DFF")
    assert sorted(g.net_slots.values()) == list(range(len(n.nets)))
    assert set(g.lut_index) == {c.id for c in n.luts}
    # pure function
    assert elaborate(n).order == g.order


def _fixed_point(n, inputs, regs):
    """Sweep all cells in declaration order until no net changes."""
    v = {net: 0 for net in n.nets}
    for p, b in zip(n.data_inputs, inputs):
        v[p.net] = int(b)
    for c, q in zip([c for c in n.cells if c.kind == "DFF"], regs):
        v[c.pins["Q"]] = int(q)
    changed = True
    while changed:
        changed = False
        for c in n.cells:
            if c.kind == "DFF":
                continue
            ins = [v[x] for x in c.inputs]
            new = {"BUF": lambda: ins[0], "NOT": lambda: 1 - ins[0], "CONST0": lambda: 0,
                   "CONST1": lambda: 1}.get(c.kind, lambda: InitMask.lookup(c.init, ins))()
            if v[c.output] != new:
                v[c.output] = new
                changed = True
    return v


@given(st.integers(0, 10_000), st.integers(0, 2**8 - 1))
def test_topological_evaluation_matches_fixed_point(seed, pattern):
    n = circuits.random_netlist(seed)
    g = elaborate(n)
    inputs = [(pattern >> j) & 1 for j in range(len(n.data_inputs))]
    regs = np.array([(pattern >> (4 + j)) & 1 for j in range(len(g.regs))], dtype=np.uint8)
    state = SimState(np.zeros(g.num_slots, dtype=np.uint8), regs, 0)
    after, _ = step(g, state, inputs)
    expect = _fixed_point(n, inputs, regs)
    for net, slot in g.net_slots.items():
        assert after.net_values[slot] == expect[net], net
