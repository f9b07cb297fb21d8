"""Shared test utilities: independent oracles and random builders."""

import random

from aptlsim.netlist import Circuit, DgaFet, NodeDecl, NodeKind
from aptlsim.signal_core import Level


def adder_oracle(a: int, b: int, cin: int, bits: int = 1):
    """Brute-force reference: (sum bits as int, carry out)."""
    total = a + b + cin
    return total & ((1 << bits) - 1), total >> bits


def fa_map(circuit: Circuit, a: int, b: int, cin: int) -> dict:
    """Full input map for a one-bit adder, complements derived by hand."""
    logical = {"a": a, "b": b, "cin": cin}
    out = {}
    for n in circuit.inputs():
        out[n] = logical[n] if n in logical else 1 - logical[n[:-1]]
    return out


def rca_map(circuit: Circuit, bits: int, a: int, b: int, cin: int) -> dict:
    logical = {f"a{i}": (a >> i) & 1 for i in range(bits)}
    logical |= {f"b{i}": (b >> i) & 1 for i in range(bits)}
    logical["cin"] = cin
    out = {}
    for n in circuit.inputs():
        out[n] = logical[n] if n in logical else 1 - logical[n[:-1]]
    return out


def rca_value(state, bits: int) -> int:
    """Sum plus carry as an integer, or -1 if any output is undefined."""
    total = 0
    for i, name in enumerate([f"s{i}" for i in range(bits)] + ["cout"]):
        lv = int(state.signal(name).level)
        if lv > 1:
            return -1
        total |= lv << i
    return total


def random_circuit(rng: random.Random, idx: int = 0,
                   max_nodes: int = 8, max_devices: int = 10) -> Circuit:
    """Small random but structurally valid circuit (may misbehave freely)."""
    nn = rng.randint(3, max_nodes)
    nodes = [NodeDecl("vdd", NodeKind.SUPPLY, Level.L1),
             NodeDecl("gnd", NodeKind.SUPPLY, Level.L0)]
    names = []
    for i in range(nn):
        if i == 0:
            kind = NodeKind.INPUT
        elif i == 1:
            kind = NodeKind.OUTPUT
        else:
            kind = rng.choice([NodeKind.INPUT, NodeKind.OUTPUT,
                               NodeKind.INTERNAL])
        nodes.append(NodeDecl(f"n{i}", kind))
        names.append(f"n{i}")
    pool = names + ["vdd", "gnd"]
    devices = []
    for d in range(rng.randint(1, max_devices)):
        while True:
            src, drn = rng.choice(pool), rng.choice(pool)
            if src != drn and not (src in ("vdd", "gnd")
                                   and drn in ("vdd", "gnd")):
                break
        devices.append(DgaFet(f"m{d}", src, drn,
                              rng.choice(pool), rng.choice(pool)))
    return Circuit(f"rnd{idx}", tuple(nodes), tuple(devices))


RING_NOT_LOOP = """\
circuit notloop
node en in
node y out
supply vdd 1
supply gnd 0
# y pulls high when en=0 or y=0, low when en=1 and y=1: a NOT loop once enabled
fet pu1 src=vdd drn=y cg=en pg=gnd
fet pu2 src=vdd drn=y cg=y pg=gnd
fet pd1 src=gnd drn=x1 cg=en pg=vdd
fet pd2 src=x1 drn=y cg=y pg=vdd
node x1 wire
"""


def ring_not_loop() -> Circuit:
    from aptlsim.netlist import parse_netlist
    return parse_netlist(RING_NOT_LOOP)
