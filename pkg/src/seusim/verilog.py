"""Reader for flattened structural Verilog netlists.

The accepted subset is what synthesis tools emit for a flattened BEL-level
design::

    `timescale 1 ps / 1 ps
    (* STRUCTURAL_NETLIST = "yes" *)
    module top (clk, a, y);
      input clk;
      input [1:0] a;
      output y;
      wire \\a_IBUF[0] ;
      LUT2 #(.INIT(4'h6)) y_i_1 (.I0(a[0]), .I1(a[1]), .O(y));
      FDRE #(.INIT(1'b0)) q_reg (.C(clk), .CE(1'b1), .D(y), .Q(q), .R(1'b0));
      assign b = a[0];
    endmodule

Comments, compiler directives and ``(* ... *)`` attributes are skipped.
Vendor primitives are mapped onto the native cell set:

==============  ==================================
vendor          native
==============  ==================================
LUT1..LUT6      LUT1..LUT6
FDRE            DFF (active-high CE and R)
IBUF OBUF BUFG  BUF
INV             NOT
GND / VCC       CONST0 / CONST1
==============  ==================================

Anything else (FDCE, DSP48E1, RAMB36E1, CARRY4, ...) raises
:class:`~seusim.errors.UnsupportedCell`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import SchemaError, UnsupportedCell, VerilogSyntaxError
from .netlist import (
    Cell,
    InitMask,
    Netlist,
    PortBit,
    lut_width,
    pin_order,
    port_labels,
    validate,
)

_NATIVE = {k: k for k in ("LUT1", "LUT2", "LUT3", "LUT4", "LUT5", "LUT6",
                          "DFF", "BUF", "NOT", "CONST0", "CONST1")}
_VENDOR = {"FDRE": "DFF", "IBUF": "BUF", "OBUF": "BUF", "BUFG": "BUF",
           "INV": "NOT", "GND": "CONST0", "VCC": "CONST1"}
# vendor pin name -> native pin name
_PIN_MAP = {"GND": {"G": "O"}, "VCC": {"P": "O"}}
# FDRE parameters that change behaviour we do not model
_FDRE_INVERSIONS = ("IS_C_INVERTED", "IS_D_INVERTED", "IS_R_INVERTED")

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<attr>\(\*.*?\*\))
  | (?P<directive>`[^\n]*)
  | (?P<literal>\d*\s*'\s*[sS]?[bBoOdDhH]\s*[0-9a-fA-FxXzZ_]+)
  | (?P<number>\d+)
  | (?P<escaped>\\\S+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<punct>[()\[\];,.:#=])
""", re.VERBOSE | re.DOTALL)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise VerilogSyntaxError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind not in ("ws", "comment", "attr", "directive"):
            val = m.group()
            if kind == "escaped":
                val, kind = val[1:], "ident"
            toks.append(_Tok(kind, val, line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return toks


def _literal_bits(text: str) -> tuple[int | None, int]:
    """Decode a sized/unsized Verilog literal into ``(width, value)``."""
    size, _, rest = text.replace(" ", "").partition("'")
    rest = rest.lstrip("sS")
    base = {"b": 2, "o": 8, "d": 10, "h": 16}[rest[0].lower()]
    digits = rest[1:].replace("_", "")
    if any(ch in "xXzZ" for ch in digits):
        raise ValueError("x/z digits are not supported")
    return (int(size) if size else None), int(digits, base)


def _param_value(tok) -> int:
    try:
        return _literal_bits(tok.text)[1] if tok.kind == "literal" else int(tok.text)
    except ValueError:
        raise VerilogSyntaxError(tok.line, tok.col, "a numeric parameter", tok.text) from None


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.port_order: list[str] = []
        self.dirs: dict[str, str] = {}
        self.ranges: dict[str, tuple[int, int]] = {}
        self.cells: list[Cell] = []
        self.nets: dict[str, None] = {}
        self.consts: dict[int, str] = {}
        self.n_assign = 0

    # -- token helpers ----------------------------------------------------
    def peek(self, offset=0):
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def _fail(self, expected):
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("eof", "", 1, 1)
            raise VerilogSyntaxError(last.line, last.col + len(last.text), expected, "end of file")
        raise VerilogSyntaxError(tok.line, tok.col, expected, tok.text)

    def take(self, text=None, kind=None):
        tok = self.peek()
        if tok is None or (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            self._fail(repr(text) if text else kind)
        self.i += 1
        return tok

    def accept(self, text):
        tok = self.peek()
        if tok is not None and tok.kind in ("punct", "ident") and tok.text == text:
            self.i += 1
            return True
        return False

    # -- grammar ----------------------------------------------------------
    def parse(self, clock=None, reset=None) -> Netlist:
        self.take("module")
        name = self.take(kind="ident").text
        if self.accept("#"):
            self._fail("module without parameters")
        if self.accept("("):
            if not self.accept(")"):
                while True:
                    if self.peek() is not None and self.peek().text in ("input", "output", "inout"):
                        self.declaration(in_header=True)
                    else:
                        self.port_order.append(self.take(kind="ident").text)
                    if self.accept(")"):
                        break
                    self.take(",")
        self.take(";")
        while not self.accept("endmodule"):
            tok = self.peek()
            if tok is None:
                self._fail("'endmodule'")
            if tok.text in ("input", "output", "inout", "wire"):
                self.declaration()
            elif tok.text == "assign":
                self.assign()
            elif tok.kind == "ident":
                self.instance()
            else:
                self._fail("a declaration or instance")
        if self.peek() is not None:
            self._fail("end of file")
        return self.build(name, clock, reset)

    def range_(self):
        if not self.accept("["):
            return None
        msb = int(self.take(kind="number").text)
        self.take(":")
        lsb = int(self.take(kind="number").text)
        self.take("]")
        return msb, lsb

    def declaration(self, in_header=False):
        tok = self.take()
        kind = tok.text
        if kind == "inout":
            raise VerilogSyntaxError(tok.line, tok.col, "input or output", "inout")
        if self.peek() is not None and self.peek().text in ("wire", "reg"):
            self.i += 1
        rng = self.range_()
        while True:
            name = self.take(kind="ident").text
            if kind != "wire":
                if name in self.dirs:
                    raise VerilogSyntaxError(tok.line, tok.col, "unique port names", name)
                self.dirs[name] = kind
                if in_header:
                    self.port_order.append(name)
            if rng is not None:
                self.ranges[name] = rng
            if in_header:
                # ANSI header: a comma may continue this declaration or start another
                nxt = self.peek(1)
                if self.peek() is not None and self.peek().text == "," and nxt is not None \
                        and nxt.kind == "ident" and nxt.text not in ("input", "output", "inout"):
                    self.i += 1
                    continue
                return
            if self.accept(";"):
                return
            self.take(",")

    def bits_of(self, name):
        rng = self.ranges.get(name)
        if rng is None:
            return [(0, name)]
        msb, lsb = rng
        step = -1 if msb >= lsb else 1
        return [(i, f"{name}[{i}]") for i in range(msb, lsb + step, step)]

    def net_ref(self):
        """A single-bit net reference: ``name``, ``name[i]`` or a 1-bit literal."""
        tok = self.peek()
        if tok is not None and tok.kind == "literal":
            self.i += 1
            try:
                width, value = _literal_bits(tok.text)
            except ValueError:
                raise VerilogSyntaxError(tok.line, tok.col, "a 0/1 literal", tok.text) from None
            if value not in (0, 1) or (width not in (None, 1)):
                raise VerilogSyntaxError(tok.line, tok.col, "a 1-bit literal", tok.text)
            return self.const_net(value)
        tok = self.take(kind="ident")
        name = tok.text
        if self.accept("["):
            idx = int(self.take(kind="number").text)
            self.take("]")
            rng = self.ranges.get(name)
            if rng is not None and not min(rng) <= idx <= max(rng):
                raise VerilogSyntaxError(tok.line, tok.col, f"an index within {name}{list(rng)}", str(idx))
            net = f"{name}[{idx}]"
        else:
            if name in self.ranges:
                raise VerilogSyntaxError(tok.line, tok.col, "a single-bit net", name)
            net = name
        self.nets.setdefault(net)
        return net

    def const_net(self, value):
        if value not in self.consts:
            net = f"<const{value}>"
            self.consts[value] = net
            self.nets.setdefault(net)
        return self.consts[value]

    def assign(self):
        self.take("assign")
        lhs = self.net_ref()
        self.take("=")
        rhs = self.net_ref()
        self.take(";")
        self.n_assign += 1
        self.cells.append(Cell(f"$assign{self.n_assign}", "BUF", {"I": rhs, "O": lhs}))

    def instance(self):
        head = self.take(kind="ident")
        vendor = head.text
        kind = _NATIVE.get(vendor) or _VENDOR.get(vendor)
        params = {}
        if self.accept("#"):
            self.take("(")
            if not self.accept(")"):
                while True:
                    self.take(".")
                    pname = self.take(kind="ident").text
                    self.take("(")
                    val = self.take()
                    if val.kind not in ("literal", "number"):
                        raise VerilogSyntaxError(val.line, val.col, "a numeric literal", val.text)
                    self.take(")")
                    params[pname] = val
                    if self.accept(")"):
                        break
                    self.take(",")
        inst = self.take(kind="ident").text
        if kind is None:
            raise UnsupportedCell(vendor, inst)
        pin_map = _PIN_MAP.get(vendor, {})
        pins = {}
        self.take("(")
        if not self.accept(")"):
            while True:
                self.take(".")
                ptok = self.take(kind="ident")
                pin = pin_map.get(ptok.text, ptok.text)
                self.take("(")
                if self.accept(")"):
                    net = None
                else:
                    net = self.net_ref()
                    self.take(")")
                if pin not in pin_order(kind):
                    raise VerilogSyntaxError(ptok.line, ptok.col, f"a pin of {vendor}", ptok.text)
                if net is not None:
                    pins[pin] = net
                if self.accept(")"):
                    break
                self.take(",")
        self.take(";")
        self.cells.append(self.make_cell(vendor, kind, inst, params, pins, head))

    def make_cell(self, vendor, kind, inst, params, pins, head):
        init = ff_init = None
        k = lut_width(kind)
        if k:
            tok = params.get("INIT")
            if tok is None:
                raise VerilogSyntaxError(head.line, head.col, f"an INIT parameter on {inst}")
            try:
                width, value = _literal_bits(tok.text) if tok.kind == "literal" else (None, int(tok.text))
            except ValueError:
                raise VerilogSyntaxError(tok.line, tok.col, "a hex or binary INIT", tok.text) from None
            if (width is not None and width != 1 << k) or value >= 1 << (1 << k):
                raise VerilogSyntaxError(tok.line, tok.col, f"a {1 << k}-bit INIT for {vendor}", tok.text)
            init = InitMask(k, value)
        elif kind == "DFF":
            for p in _FDRE_INVERSIONS:
                if p in params and _param_value(params[p]):
                    raise UnsupportedCell(f"{vendor} with {p}=1", inst)
            tok = params.get("INIT")
            ff_init = 0
            if tok is not None:
                ff_init = _param_value(tok)
                if ff_init not in (0, 1):
                    raise VerilogSyntaxError(tok.line, tok.col, "a 1-bit flip-flop INIT", tok.text)
        return Cell(inst, kind, pins, init, ff_init)

    def build(self, name, clock, reset) -> Netlist:
        for port in self.port_order:
            if port not in self.dirs:
                raise SchemaError(f"ports/{port}", "port has no input/output declaration")
        ins, outs = [], []
        for port in self.port_order:
            bits = [PortBit(port, idx, net) for idx, net in self.bits_of(port)]
            (ins if self.dirs[port] == "input" else outs).extend(bits)
        for p in ins + outs:
            self.nets.setdefault(p.net)
        cells = list(self.cells)
        for value, net in sorted(self.consts.items()):
            cells.append(Cell(f"$const{value}", f"CONST{value}", {"O": net}))

        # declared-or-referenced nets that nothing drives and nothing reads are dropped
        used = {p.net for p in ins + outs}
        for c in cells:
            used.update(c.pins.values())
        nets = tuple(n for n in self.nets if n in used)
        n = Netlist(name, tuple(ins), tuple(outs), nets, tuple(cells),
                    _resolve_port(ins, clock, "clock") if clock else _infer_clock(ins, cells),
                    _resolve_port(ins, reset, "reset") if reset else None)
        validate(n)
        return n


def _resolve_port(ins, name, what):
    for p in ins:
        if p.net == name or (p.name == name and p.index == 0):
            return p.net
    raise SchemaError(what, f"{name} is not an input")


def clock_root(cells, net) -> str:
    """Follow buffer chains upstream from ``net`` to the net they start from."""
    drivers = {c.output: c for c in cells if c.kind == "BUF"}
    seen = set()
    while net in drivers and net not in seen:
        seen.add(net)
        net = drivers[net].pins["I"]
    return net


def _infer_clock(ins, cells):
    roots = {clock_root(cells, c.pins["C"]) for c in cells if c.kind == "DFF" and "C" in c.pins}
    in_nets = {p.net for p in ins}
    if len(roots) == 1:
        root = roots.pop()
        if root in in_nets:
            return root
    return None


def parse_verilog(text, clock: str | None = None, reset: str | None = None) -> Netlist:
    """Parse a flattened structural Verilog module into a :class:`Netlist`.

    :param text: Verilog source, or a readable file object.
    :param clock: Name of the clock input. Inferred from the flip-flop C pins when omitted.
    :param reset: Name of an input to hold inactive (0) during simulation.
    """
    if hasattr(text, "read"):
        text = text.read()
    return _Parser(text).parse(clock, reset)


def write_verilog(n: Netlist) -> str:
    """Emit ``n`` as native-cell structural Verilog that :func:`parse_verilog` reads back.

    Port bits that sit on a differently named net are tied to it with
    ``assign``, which reads back as an extra BUF cell.
    """
    labels = set(port_labels(n.inputs) + port_labels(n.outputs))

    def ref(name):
        if name in labels or re.fullmatch(r"[A-Za-z_][A-Za-z0-9_$]*", name):
            return name
        return "\\" + name + " "

    lines, assigns = [], []
    ports = list(dict.fromkeys(p.name for p in n.inputs + n.outputs))
    lines.append(f"module {n.name} ({', '.join(ports)});")
    port_nets = set()
    for direction, group in (("input", n.inputs), ("output", n.outputs)):
        for pname in dict.fromkeys(p.name for p in group):
            bits = [p for p in group if p.name == pname]
            scalar = len(bits) == 1 and bits[0].index == 0
            if scalar:
                lines.append(f"  {direction} {pname};")
            else:
                lines.append(f"  {direction} [{bits[0].index}:{bits[-1].index}] {pname};")
            for b in bits:
                label = pname if scalar else f"{pname}[{b.index}]"
                if b.net == label:
                    port_nets.add(b.net)
                elif direction == "input":
                    assigns.append(f"  assign {ref(b.net)} = {label};")
                else:
                    assigns.append(f"  assign {label} = {ref(b.net)};")
    for net in n.nets:
        if net not in port_nets:
            lines.append(f"  wire {ref(net)};")
    lines.extend(assigns)
    for c in n.cells:
        conns = ", ".join(f".{pin}({ref(c.pins[pin])})" for pin in pin_order(c.kind) if pin in c.pins)
        if c.init is not None:
            param = f" #(.INIT({c.init.size}'h{c.init.hex()}))"
        elif c.kind == "DFF":
            param = f" #(.INIT(1'b{c.ff_init}))"
        else:
            param = ""
        lines.append(f"  {c.kind}{param} {ref(c.id)} ({conns});")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"

