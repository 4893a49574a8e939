"""In-memory netlist model for flattened BEL-level designs and its JSON IR.

A :class:`Netlist` is a flat list of cells wired by named nets. Only a small
set of primitives is representable: ``LUT1`` to ``LUT6``, ``DFF``, ``BUF``,
``NOT``, ``CONST0`` and ``CONST1``. Vendor primitives are mapped onto these
by the Verilog reader (:mod:`seusim.verilog`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import (
    MultipleDrivers,
    SchemaError,
    UnconnectedPin,
    UndrivenNet,
    UnknownCell,
)

IR_VERSION = 1

LUT_KINDS = tuple(f"LUT{k}" for k in range(1, 7))
CELL_KINDS = LUT_KINDS + ("DFF", "BUF", "NOT", "CONST0", "CONST1")
DFF_PINS = ("D", "Q", "CE", "R", "C")


def lut_width(kind: str) -> int:
    """Number of inputs of a LUT kind, 0 for anything else."""
    return int(kind[3]) if kind in LUT_KINDS else 0


def input_pins(kind: str) -> tuple[str, ...]:
    k = lut_width(kind)
    if k:
        return tuple(f"I{j}" for j in range(k))
    if kind in ("BUF", "NOT"):
        return ("I",)
    if kind == "DFF":
        return ("D", "CE", "R", "C")
    return ()


def output_pin(kind: str) -> str:
    return "Q" if kind == "DFF" else "O"


def pin_order(kind: str) -> tuple[str, ...]:
    if kind == "DFF":
        return DFF_PINS
    return input_pins(kind) + ("O",)


@dataclass(frozen=True)
class InitMask:
    """Truth table of a ``k``-input LUT.

    Entry ``m`` of the table is bit ``m`` of :attr:`value`, where ``m`` is the
    unsigned integer formed by the LUT inputs with ``I0`` as least significant bit.
    """

    k: int
    value: int

    def __post_init__(self):
        if not 1 <= self.k <= 6:
            raise ValueError(f"LUT width must be 1..6, got {self.k}")
        if not 0 <= self.value < (1 << self.size):
            raise ValueError(f"INIT value {self.value:#x} does not fit {self.size} bits")

    @property
    def size(self) -> int:
        return 1 << self.k

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> m) & 1 for m in range(self.size))

    @classmethod
    def from_bits(cls, bits) -> InitMask:
        bits = [int(b) for b in bits]
        k = len(bits).bit_length() - 1
        if len(bits) != 1 << k or not 1 <= k <= 6:
            raise ValueError(f"truth table length {len(bits)} is not 2**k for k in 1..6")
        return cls(k, sum(b << m for m, b in enumerate(bits)))

    def lookup(self, inputs) -> int:
        idx = 0
        for j, v in enumerate(inputs):
            idx |= (int(v) & 1) << j
        return (self.value >> idx) & 1

    def complement(self) -> InitMask:
        return InitMask(self.k, self.value ^ ((1 << self.size) - 1))

    def hex(self) -> str:
        return format(self.value, f"0{max(1, self.size // 4)}x")


@dataclass(frozen=True)
class PortBit:
    name: str
    index: int
    net: str


@dataclass(frozen=True)
class Cell:
    id: str
    kind: str
    pins: dict = field(compare=True)
    init: InitMask | None = None
    ff_init: int | None = None

    @property
    def output(self) -> str:
        return self.pins[output_pin(self.kind)]

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(self.pins[p] for p in input_pins(self.kind) if p in self.pins)

    @property
    def is_lut(self) -> bool:
        return self.kind in LUT_KINDS


@dataclass(frozen=True)
class Netlist:
    name: str
    inputs: tuple[PortBit, ...]
    outputs: tuple[PortBit, ...]
    nets: tuple[str, ...]
    cells: tuple[Cell, ...]
    clock: str | None = None
    reset: str | None = None

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise UnknownCell(cell_id)

    @property
    def luts(self) -> tuple[Cell, ...]:
        return tuple(c for c in self.cells if c.is_lut)

    @property
    def data_inputs(self) -> tuple[PortBit, ...]:
        """Input bits driven by stimulus, i.e. everything but clock and reset."""
        special = {self.clock, self.reset} - {None}
        return tuple(p for p in self.inputs if p.net not in special)

    def output_labels(self) -> list[str]:
        return port_labels(self.outputs)

    def input_labels(self) -> list[str]:
        return port_labels(self.data_inputs)

    def validate(self) -> Netlist:
        validate(self)
        return self


def port_labels(ports) -> list[str]:
    """``name`` for single-bit ports, ``name[i]`` for bits of vector ports."""
    width: dict[str, int] = {}
    for p in ports:
        width[p.name] = width.get(p.name, 0) + 1
    return [p.name if width[p.name] == 1 and p.index == 0 else f"{p.name}[{p.index}]"
            for p in ports]


def validate(n: Netlist) -> None:
    """Check the structural invariants, raising on the first violation."""
    seen = set()
    for p in n.inputs + n.outputs:
        key = ("in" if p in n.inputs else "out", p.name, p.index)
        if key in seen:
            raise SchemaError(f"ports/{p.name}[{p.index}]", "duplicate port bit")
        seen.add(key)
    names_in = {p.name for p in n.inputs}
    if names_in & {p.name for p in n.outputs}:
        raise SchemaError("ports", "port declared as both input and output")

    nets = set(n.nets)
    if len(nets) != len(n.nets):
        raise SchemaError("nets", "duplicate net id")
    ids = set()
    drivers: dict[str, str] = {}

    def drive(net, who):
        if net in drivers:
            raise MultipleDrivers(net)
        drivers[net] = who

    for p in n.inputs:
        if p.net not in nets:
            raise SchemaError(f"inputs/{p.name}", f"unknown net {p.net}")
        drive(p.net, f"input {p.name}")
    for c in n.cells:
        if c.id in ids:
            raise SchemaError(f"cells/{c.id}", "duplicate cell id")
        ids.add(c.id)
        if c.kind not in CELL_KINDS:
            raise SchemaError(f"cells/{c.id}/kind", f"unknown kind {c.kind}")
        k = lut_width(c.kind)
        if k and (c.init is None or c.init.k != k):
            raise SchemaError(f"cells/{c.id}/init", f"{c.kind} needs a {1 << k}-bit INIT")
        if not k and c.init is not None:
            raise SchemaError(f"cells/{c.id}/init", "only LUTs carry INIT")
        if c.kind == "DFF" and c.ff_init not in (0, 1):
            raise SchemaError(f"cells/{c.id}/ff_init", "DFF init must be 0 or 1")
        allowed = set(pin_order(c.kind))
        for pin in c.pins:
            if pin not in allowed:
                raise SchemaError(f"cells/{c.id}/pins/{pin}", f"no such pin on {c.kind}")
        for pin in pin_order(c.kind):
            if pin not in c.pins:
                if c.kind == "DFF" and pin == "C":
                    continue
                raise UnconnectedPin(c.id, pin)
            if c.pins[pin] not in nets:
                raise SchemaError(f"cells/{c.id}/pins/{pin}", f"unknown net {c.pins[pin]}")
        drive(c.output, c.id)

    for net in n.nets:
        if net not in drivers:
            raise UndrivenNet(net)
    for p in n.outputs:
        if p.net not in nets:
            raise SchemaError(f"outputs/{p.name}", f"unknown net {p.net}")
    for attr in ("clock", "reset"):
        net = getattr(n, attr)
        if net is not None and net not in {p.net for p in n.inputs}:
            raise SchemaError(attr, f"{net} is not an input net")


def replace_cell(n: Netlist, cell: Cell) -> Netlist:
    n.cell(cell.id)
    return replace(n, cells=tuple(cell if c.id == cell.id else c for c in n.cells))


# -- JSON IR ---------------------------------------------------------------

def to_dict(n: Netlist) -> dict:
    doc = {
        "ir_version": IR_VERSION,
        "name": n.name,
        "inputs": [{"name": p.name, "index": p.index, "net": p.net} for p in n.inputs],
        "outputs": [{"name": p.name, "index": p.index, "net": p.net} for p in n.outputs],
        "nets": list(n.nets),
        "cells": [],
    }
    for c in n.cells:
        entry = {"id": c.id, "kind": c.kind}
        if c.init is not None:
            entry["init"] = c.init.hex()
        if c.ff_init is not None:
            entry["ff_init"] = c.ff_init
        entry["pins"] = {p: c.pins[p] for p in pin_order(c.kind) if p in c.pins}
        doc["cells"].append(entry)
    if n.clock is not None:
        doc["clock"] = n.clock
    if n.reset is not None:
        doc["reset"] = n.reset
    return doc


def write_ir(n: Netlist) -> str:
    return json.dumps(to_dict(n), indent=2) + "\n"


def _expect(obj, key, typ, path, optional=False):
    if key not in obj:
        if optional:
            return None
        raise SchemaError(f"{path}/{key}", "missing")
    val = obj[key]
    if not isinstance(val, typ) or (typ is int and isinstance(val, bool)):
        raise SchemaError(f"{path}/{key}", f"expected {getattr(typ, '__name__', typ)}")
    return val


def _parse_init(raw, kind, path) -> InitMask:
    k = lut_width(kind)
    if isinstance(raw, list):
        if len(raw) != 1 << k or any(b not in (0, 1) for b in raw):
            raise SchemaError(path, f"{kind} needs exactly {1 << k} bits, got {len(raw)}")
        return InitMask.from_bits(raw)
    if isinstance(raw, str):
        try:
            value = int(raw, 16)
        except ValueError:
            raise SchemaError(path, f"bad hex literal {raw!r}") from None
        if value >= 1 << (1 << k):
            raise SchemaError(path, f"{raw} does not fit {1 << k} bits")
        return InitMask(k, value)
    raise SchemaError(path, "init must be a hex string or a list of bits")


def from_dict(doc) -> Netlist:
    if not isinstance(doc, dict):
        raise SchemaError("", "document must be an object")
    if doc.get("ir_version") != IR_VERSION:
        raise SchemaError("ir_version", f"expected {IR_VERSION}")
    name = _expect(doc, "name", str, "")

    def ports(key):
        out = []
        for i, p in enumerate(_expect(doc, key, list, "")):
            path = f"{key}/{i}"
            if not isinstance(p, dict):
                raise SchemaError(path, "expected object")
            out.append(PortBit(_expect(p, "name", str, path), _expect(p, "index", int, path),
                               _expect(p, "net", str, path)))
        return tuple(out)

    nets = _expect(doc, "nets", list, "")
    if not all(isinstance(x, str) for x in nets):
        raise SchemaError("nets", "net ids must be strings")
    cells = []
    for i, c in enumerate(_expect(doc, "cells", list, "")):
        path = f"cells/{i}"
        if not isinstance(c, dict):
            raise SchemaError(path, "expected object")
        kind = _expect(c, "kind", str, path)
        if kind not in CELL_KINDS:
            raise SchemaError(f"{path}/kind", f"unknown kind {kind}")
        pins = _expect(c, "pins", dict, path)
        if not all(isinstance(v, str) for v in pins.values()):
            raise SchemaError(f"{path}/pins", "pin nets must be strings")
        init = None
        if lut_width(kind):
            if "init" not in c:
                raise SchemaError(f"{path}/init", "missing")
            init = _parse_init(c["init"], kind, f"{path}/init")
        ff_init = None
        if kind == "DFF":
            ff_init = c.get("ff_init", 0)
            if ff_init not in (0, 1) or isinstance(ff_init, bool):
                raise SchemaError(f"{path}/ff_init", "must be 0 or 1")
        cells.append(Cell(_expect(c, "id", str, path), kind, dict(pins), init, ff_init))
    n = Netlist(name, ports("inputs"), ports("outputs"), tuple(nets), tuple(cells),
                _expect(doc, "clock", str, "", optional=True),
                _expect(doc, "reset", str, "", optional=True))
    validate(n)
    return n


def read_ir(text) -> Netlist:
    """Load a netlist from its JSON IR (a string or a readable file object)."""
    if hasattr(text, "read"):
        text = text.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"invalid JSON: {e}") from None
    return from_dict(doc)
