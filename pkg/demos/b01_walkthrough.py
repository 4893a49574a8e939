"""
Fault campaign on the b01 state machine
=======================================

Parse a vendor-style structural netlist, invert each LUT in turn and print
how often each output differs from the fault-free design, cycle by cycle.
"""

from seusim import build_report, circuits, elaborate, enumerate_faults, exhaustive, run_campaign
from seusim.campaign import CampaignConfig

# The netlist ships with the package: 5 LUTs, 3 FDRE state registers and
# the IBUF/OBUF/BUFG buffers the vendor flow inserts.
netlist = circuits.b01()
print(f"{len(netlist.luts)} LUTs, clock {netlist.clock!r}, outputs {netlist.output_labels()}")

# Two data inputs over four cycles is only 256 input matrices, so every one
# of them is simulated.
graph = elaborate(netlist)
stimulus = exhaustive(graph.num_inputs, cycles=4)
matrix = run_campaign(graph, enumerate_faults(netlist), CampaignConfig(stimulus))

# Possibility = runs with a mismatch at (output, cycle) / all runs.
# Total = runs with a mismatch in any cycle / all runs.
report = build_report(matrix)
poss, total = report.possibility.to_float(), report.total.to_float()
print(f"\n{'LUT':12s} {'output':8s} " + " ".join(f"c{c + 1:<5d}" for c in range(matrix.cycles)) + " total")
for f, lut in enumerate(matrix.faults):
    for b, out in enumerate(matrix.outputs):
        cells = " ".join(f"{x:<6.3g}" for x in poss[f, b])
        print(f"{lut:12s} {out:8s} {cells} {total[f, b]:.3g}")

# FSM_st[1] never shows up at an output: its inverted next-state bit is
# always cancelled before it reaches outp or overflw. The two LUTs that
# drive the outputs directly are wrong in every run and every cycle.
print("\nscores:", {lut: str(s) for lut, s in zip(matrix.faults, report.score)})
