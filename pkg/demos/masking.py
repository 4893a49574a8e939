"""
Reconvergent masking
====================

A LUT whose output fans out into two inverting paths that meet again in a
XOR. Inverting that LUT flips both paths, the XOR cancels the two flips and
the fault can never be observed.
"""

import numpy as np

from seusim import apply_fault, circuits, elaborate, exhaustive
from seusim.reference import EventSim
from seusim.sim import FaultOverlay, run_many

netlist = circuits.reconvergent()
for cell in netlist.cells:
    print(f"{cell.id:5s} {cell.kind:6s} {cell.pins}")

graph = elaborate(netlist)
stim = exhaustive(graph.num_inputs, cycles=3)

# Golden and faulty traces for every one of the 512 runs.
golden = run_many(graph, stim.bits)
faulty = run_many(graph, stim.bits, FaultOverlay("fan"))
print("\nruns where inverting 'fan' is visible:", int((golden != faulty).any(axis=(1, 2)).sum()))

# Compare: inverting 'p2', one of the two paths, is visible immediately.
p2 = run_many(graph, stim.bits, FaultOverlay("p2"))
print("runs where inverting 'p2' is visible: ", int((golden != p2).any(axis=(1, 2)).sum()))

# The overlay is the same thing as simulating a copy of the netlist whose
# INIT mask is complemented, checked here with the event-driven simulator.
edited = EventSim(apply_fault(netlist, "p2"))
same = all(np.array_equal(edited.run(stim.bits[r]), p2[r]) for r in range(stim.runs))
print("overlay matches edited netlist:", same)
