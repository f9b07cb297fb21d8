"""Generators for the circuit family: inverters, XNOR gates, one-bit full
adders in four styles, and N-bit ripple-carry adders.

Complement conventions: the complemented form of an input port ``x`` is the
port ``xb``. Hybrid adders expose complement inputs as ports (a previous
stage's inverters would drive them in a larger system); for standalone
simulation :func:`expand_vector` derives them, so device counts stay pure.
"""

from __future__ import annotations

from enum import Enum
from typing import Mapping, Sequence

from .netlist import Circuit, DgaFet, NodeDecl, NodeKind
from .signal_core import Level


class Style(Enum):
    BASELINE = "baseline"
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"


class Cascade(Enum):
    CG = "cg"
    PG = "pg"


class _Builder:
    def __init__(self, name: str):
        self.name = name
        self.nodes: list[NodeDecl] = []
        self.devices: list[DgaFet] = []
        self._names: set[str] = set()

    def node(self, name: str, kind: NodeKind, level: Level = None) -> str:
        if name not in self._names:
            self._names.add(name)
            self.nodes.append(NodeDecl(name, kind, level))
        return name

    def wire(self, name: str) -> str:
        return self.node(name, NodeKind.INTERNAL)

    def supplies(self) -> tuple[str, str]:
        vdd = self.node("vdd", NodeKind.SUPPLY, Level.L1)
        gnd = self.node("gnd", NodeKind.SUPPLY, Level.L0)
        return vdd, gnd

    def fet(self, name: str, src: str, drn: str, cg: str, pg: str) -> None:
        self._names.add(name)
        self.devices.append(DgaFet(name, src, drn, cg, pg))

    def inverter(self, prefix: str, inp: str, out: str,
                 cascade: Cascade) -> None:
        """Two-device restoring inverter between the supplies.

        CG cascading puts the input on both control gates with fixed
        polarity biasing; PG cascading puts it on both polarity gates with
        fixed control biasing.
        """
        vdd, gnd = self.supplies()
        if cascade == Cascade.CG:
            self.fet(prefix + "p", vdd, out, inp, gnd)
            self.fet(prefix + "n", gnd, out, inp, vdd)
        else:
            self.fet(prefix + "p", vdd, out, gnd, inp)
            self.fet(prefix + "n", gnd, out, vdd, inp)

    def build(self) -> Circuit:
        return Circuit(self.name, tuple(self.nodes), tuple(self.devices))


def gen_inverter(cascade: Cascade) -> Circuit:
    b = _Builder(f"inv_{cascade.value}")
    a = b.node("a", NodeKind.INPUT)
    y = b.node("y", NodeKind.OUTPUT)
    b.supplies()
    b.inverter("m", a, y, cascade)
    return b.build()


class XnorVariant(Enum):
    SINGLE = "single"
    QUAD = "quad"


def gen_xnor(variant: XnorVariant) -> Circuit:
    """XNOR gate: the one-device form drives its output only for the true
    case (relying on charge retention otherwise); the four-device form is a
    full-swing complementary pair network and needs complemented inputs."""
    if variant == XnorVariant.SINGLE:
        b = _Builder("xnor1")
        a = b.node("a", NodeKind.INPUT)
        bb_ = b.node("b", NodeKind.INPUT)
        y = b.node("y", NodeKind.OUTPUT)
        vdd = b.node("vdd", NodeKind.SUPPLY, Level.L1)
        b.fet("m1", vdd, y, a, bb_)
        return b.build()
    b = _Builder("xnor4")
    a = b.node("a", NodeKind.INPUT)
    b_ = b.node("b", NodeKind.INPUT)
    ab = b.node("ab", NodeKind.INPUT)
    bb = b.node("bb", NodeKind.INPUT)
    y = b.node("y", NodeKind.OUTPUT)
    vdd, gnd = b.supplies()
    b.fet("mu1", vdd, y, a, b_)
    b.fet("mu2", vdd, y, ab, bb)
    b.fet("md1", gnd, y, a, bb)
    b.fet("md2", gnd, y, ab, b_)
    return b.build()


def _tg(b: _Builder, prefix: str, src: str, drn: str,
        g: str, gb: str, p: str, pb: str, single: bool) -> None:
    """Transmission pair gated to conduct when g == p; the complementary
    polarity gates make the pair full swing. ``single`` keeps only the
    first device (pass-transistor core), trading swing for count."""
    b.fet(prefix + "1", src, drn, g, p)
    if not single:
        b.fet(prefix + "2", src, drn, gb, pb)


def _fa_core(b: _Builder, p: str, a: str, b_: str, ab: str, bb: str,
             cin: str, cinb: str, sum_n: str, cout_n: str,
             single: bool) -> None:
    """Mux core of a full adder.

    The sum side passes cin when a == b and the complemented carry when
    a != b; the carry side passes a when a == b and cin when a != b.
    """
    _tg(b, p + "x", cin, sum_n, a, ab, b_, bb, single)
    _tg(b, p + "y", cinb, sum_n, a, ab, bb, b_, single)
    _tg(b, p + "u", a, cout_n, a, ab, b_, bb, single)
    _tg(b, p + "v", cin, cout_n, a, ab, bb, b_, single)


def _baseline_fa(b: _Builder, p: str, a: str, b_: str, cin: str,
                 sum_n: str, cout_n: str, cascade: Cascade) -> None:
    """Static complementary 28-device full adder with fixed polarity
    biasing: mirrored carry and sum stages plus two output inverters."""
    vdd, gnd = b.supplies()
    cb = b.wire(p + "cb")
    sb = b.wire(p + "sb")

    def nmos(name, lo, hi, gate):
        b.fet(name, lo, hi, gate, vdd)

    def pmos(name, hi, lo, gate):
        b.fet(name, hi, lo, gate, gnd)

    n1, n2 = b.wire(p + "n1"), b.wire(p + "n2")
    p1, p2 = b.wire(p + "p1"), b.wire(p + "p2")
    nmos(p + "cn1", cb, n1, a)
    nmos(p + "cn2", n1, gnd, b_)
    nmos(p + "cn3", cb, n2, cin)
    nmos(p + "cn4", n2, gnd, a)
    nmos(p + "cn5", n2, gnd, b_)
    pmos(p + "cp1", cb, p1, a)
    pmos(p + "cp2", p1, vdd, b_)
    pmos(p + "cp3", cb, p2, cin)
    pmos(p + "cp4", p2, vdd, a)
    pmos(p + "cp5", p2, vdd, b_)

    m1, m2, m3 = b.wire(p + "m1"), b.wire(p + "m2"), b.wire(p + "m3")
    q1, q2, q3 = b.wire(p + "q1"), b.wire(p + "q2"), b.wire(p + "q3")
    nmos(p + "sn1", sb, m1, a)
    nmos(p + "sn2", m1, m2, b_)
    nmos(p + "sn3", m2, gnd, cin)
    nmos(p + "sn4", sb, m3, cb)
    nmos(p + "sn5", m3, gnd, a)
    nmos(p + "sn6", m3, gnd, b_)
    nmos(p + "sn7", m3, gnd, cin)
    pmos(p + "sp1", sb, q1, a)
    pmos(p + "sp2", q1, q2, b_)
    pmos(p + "sp3", q2, vdd, cin)
    pmos(p + "sp4", sb, q3, cb)
    pmos(p + "sp5", q3, vdd, a)
    pmos(p + "sp6", q3, vdd, b_)
    pmos(p + "sp7", q3, vdd, cin)

    b.inverter(p + "ic", cb, cout_n, cascade)
    b.inverter(p + "is", sb, sum_n, cascade)


def _hybrid_fa(b: _Builder, p: str, style: Style, cascade: Cascade,
               a: str, b_: str, ab: str, bb: str, cin: str, cinb: str,
               sum_n: str, sumb_n: str, cout_n: str, coutb_n: str) -> None:
    b.supplies()
    single = style == Style.TYPE2
    if style == Style.TYPE3:
        # Core drives the true outputs directly; one inverter per output
        # provides the complement.
        _fa_core(b, p, a, b_, ab, bb, cin, cinb, sum_n, cout_n, single)
        b.inverter(p + "is", sum_n, sumb_n, cascade)
        b.inverter(p + "ic", cout_n, coutb_n, cascade)
    else:
        score = b.wire(p + "score")
        ccore = b.wire(p + "ccore")
        _fa_core(b, p, a, b_, ab, bb, cin, cinb, score, ccore, single)
        b.inverter(p + "is1", score, sumb_n, cascade)
        b.inverter(p + "is2", sumb_n, sum_n, cascade)
        b.inverter(p + "ic1", ccore, coutb_n, cascade)
        b.inverter(p + "ic2", coutb_n, cout_n, cascade)


def gen_full_adder(style: Style, cascade: Cascade) -> Circuit:
    """One-bit full adder.

    The baseline takes true inputs only; the hybrid styles additionally
    take the complemented inputs they actually use as ports. Hybrid styles
    expose sum/cout and their complements as outputs.
    """
    b = _Builder(f"fa_{style.value}_{cascade.value}")
    a = b.node("a", NodeKind.INPUT)
    b_ = b.node("b", NodeKind.INPUT)
    cin = b.node("cin", NodeKind.INPUT)
    if style == Style.BASELINE:
        sum_n = b.node("sum", NodeKind.OUTPUT)
        cout_n = b.node("cout", NodeKind.OUTPUT)
        _baseline_fa(b, "", a, b_, cin, sum_n, cout_n, cascade)
        return b.build()
    ab = None if style == Style.TYPE2 else b.node("ab", NodeKind.INPUT)
    bb = b.node("bb", NodeKind.INPUT)
    cinb = b.node("cinb", NodeKind.INPUT)
    sum_n = b.node("sum", NodeKind.OUTPUT)
    sumb_n = b.node("sumb", NodeKind.OUTPUT)
    cout_n = b.node("cout", NodeKind.OUTPUT)
    coutb_n = b.node("coutb", NodeKind.OUTPUT)
    _hybrid_fa(b, "", style, cascade, a, b_, ab, bb, cin, cinb,
               sum_n, sumb_n, cout_n, coutb_n)
    return b.build()


def gen_ripple_carry(style: Style, cascade: Cascade, bits: int) -> Circuit:
    """N-bit ripple-carry adder chaining full adder stages.

    The carry of each stage feeds the next directly; hybrid stages also
    forward the complemented carry from their inverters, so no devices are
    added beyond bits times the per-stage count. Outputs are s0..s{N-1}
    and cout.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    if bits == 1:
        return gen_full_adder(style, cascade)
    b = _Builder(f"rca{bits}_{style.value}_{cascade.value}")
    hybrid = style != Style.BASELINE
    for i in range(bits):
        b.node(f"a{i}", NodeKind.INPUT)
        b.node(f"b{i}", NodeKind.INPUT)
    b.node("cin", NodeKind.INPUT)
    if hybrid:
        for i in range(bits):
            if style != Style.TYPE2:
                b.node(f"a{i}b", NodeKind.INPUT)
            b.node(f"b{i}b", NodeKind.INPUT)
        b.node("cinb", NodeKind.INPUT)
    for i in range(bits):
        b.node(f"s{i}", NodeKind.OUTPUT)
    b.node("cout", NodeKind.OUTPUT)
    b.supplies()

    for i in range(bits):
        p = f"f{i}_"
        last = i == bits - 1
        carry_in = "cin" if i == 0 else f"c{i}"
        carry_out = "cout" if last else b.wire(f"c{i + 1}")
        if style == Style.BASELINE:
            _baseline_fa(b, p, f"a{i}", f"b{i}", carry_in,
                         f"s{i}", carry_out, cascade)
        else:
            carry_inb = "cinb" if i == 0 else f"c{i}b"
            carry_outb = b.wire(p + "coutb" if last else f"c{i + 1}b")
            ab = None if style == Style.TYPE2 else f"a{i}b"
            _hybrid_fa(b, p, style, cascade,
                       f"a{i}", f"b{i}", ab, f"b{i}b", carry_in, carry_inb,
                       f"s{i}", b.wire(p + "sumb"), carry_out, carry_outb)
    return b.build()


def logical_inputs(circuit: Circuit) -> list[str]:
    """Input ports that are not derived complements of another input."""
    ins = set(circuit.inputs())
    return [n for n in circuit.inputs()
            if not (n.endswith("b") and n[:-1] in ins)]


def expand_vector(circuit: Circuit,
                  assignment: Mapping[str, object]) -> dict[str, int]:
    """Full input map from a logical assignment, deriving complement ports.

    An input ``xb`` whose base ``x`` is assigned gets the complement of x;
    anything else missing is an error.
    """
    full: dict[str, int] = {}
    for name in circuit.inputs():
        if name in assignment:
            full[name] = int(assignment[name])
        elif name.endswith("b") and name[:-1] in assignment:
            full[name] = 1 - int(assignment[name[:-1]])
        else:
            raise ValueError(f"no value for input {name!r}")
    return full


def adder_input_names(bits: int) -> list[str]:
    """Logical input names of the generated adders, in workload order."""
    if bits == 1:
        return ["a", "b", "cin"]
    return [f"a{i}" for i in range(bits)] \
        + [f"b{i}" for i in range(bits)] + ["cin"]


def adder_ports(circuit: Circuit, bits: int) -> tuple[list[str], list[str]]:
    """(input names, sum output names + cout) for truth checking."""
    ins = adder_input_names(bits)
    outs = (["sum"] if bits == 1 else [f"s{i}" for i in range(bits)]) \
        + ["cout"]
    for n in ins + outs:
        if not circuit.has_node(n):
            raise ValueError(f"circuit lacks adder port {n!r}")
    return ins, outs
