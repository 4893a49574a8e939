"""Single-LUT inversion faults.

The fault model inverts the whole programmed function of one LUT (every
truth-table entry complemented). There is one fault per LUT in the design.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

from .errors import UnknownCell
from .netlist import Netlist, replace_cell
from .sim import FaultOverlay


@dataclass(frozen=True)
class FaultSpec:
    lut: str
    label: str
    kind: str = ""

    def overlay(self) -> FaultOverlay:
        return FaultOverlay(self.lut)


@dataclass(frozen=True)
class FaultUniverse:
    faults: tuple[FaultSpec, ...]

    def __len__(self):
        return len(self.faults)

    def __iter__(self):
        return iter(self.faults)

    def __getitem__(self, i):
        return self.faults[i]

    @property
    def ids(self) -> list[str]:
        return [f.lut for f in self.faults]

    def subset(self, indices) -> FaultUniverse:
        return FaultUniverse(tuple(self.faults[i] for i in indices))


def enumerate_faults(n: Netlist) -> FaultUniverse:
    """One fault per LUT, in declaration order."""
    return FaultUniverse(tuple(FaultSpec(c.id, c.id, c.kind) for c in n.cells if c.is_lut))


def apply_fault(n: Netlist, f: FaultSpec | str) -> Netlist:
    """Copy of ``n`` with the target LUT's INIT mask complemented."""
    target = f.lut if isinstance(f, FaultSpec) else f
    cell = n.cell(target)
    if not cell.is_lut:
        raise UnknownCell(target)
    return replace_cell(n, replace(cell, init=cell.init.complement(), pins=dict(cell.pins)))


def faults_csv(u: FaultUniverse) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "cell_id", "kind"])
    for i, f in enumerate(u):
        w.writerow([i, f.lut, f.kind])
    return buf.getvalue()
