"""Structural circuit model and the line-oriented ``.net`` netlist format.

Grammar (one declaration per line, ``#`` starts a comment, blank lines
ignored)::

    file := "circuit" NAME NL (decl NL)*
    decl := "node" NAME ("in"|"out"|"wire")
          | "supply" NAME ("0"|"1")
          | "fet" NAME "src=" NAME "drn=" NAME "cg=" NAME "pg=" NAME

Identifiers are ``[a-z0-9_]+``, case-insensitive on input and lowercased in
the canonical form. Circuits are immutable after construction and safe to
share between concurrent simulations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .signal_core import Level


class NodeKind(Enum):
    INPUT = "in"
    OUTPUT = "out"
    INTERNAL = "wire"
    SUPPLY = "supply"


class NetlistError(Exception):
    """Base class for netlist construction and parse errors.

    Carries an optional (line, column) location, both 1-based.
    """

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", col {column}"
            loc = f" ({loc})"
        super().__init__(message + loc)


class NetlistSyntaxError(NetlistError):
    pass


class DuplicateNameError(NetlistError):
    pass


class DanglingReferenceError(NetlistError):
    pass


class SelfLoopError(NetlistError):
    """A device whose source and drain reference the same node."""


@dataclass(frozen=True)
class NodeDecl:
    name: str
    kind: NodeKind
    supply_level: Optional[Level] = None

    def __post_init__(self):
        if (self.kind == NodeKind.SUPPLY) != (self.supply_level is not None):
            raise ValueError("supply_level set iff kind is SUPPLY")
        if self.supply_level not in (None, Level.L0, Level.L1):
            raise ValueError("supply level must be 0 or 1")


@dataclass(frozen=True)
class DgaFet:
    """One dual-gate ambipolar device: bidirectional channel between src and
    drn, conduction set by the cg and pg node levels."""

    id: str
    src: str
    drn: str
    cg: str
    pg: str


@dataclass(frozen=True)
class Circuit:
    name: str
    nodes: tuple[NodeDecl, ...]
    devices: tuple[DgaFet, ...]
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "devices", tuple(self.devices))
        object.__setattr__(self, "_index",
                           {n.name: n for n in self.nodes})
        _validate(self)

    def node(self, name: str) -> NodeDecl:
        return self._index[name]

    def has_node(self, name: str) -> bool:
        return name in self._index

    def inputs(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.kind == NodeKind.INPUT)

    def outputs(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.kind == NodeKind.OUTPUT)


_IDENT = re.compile(r"[a-z0-9_]+\Z")


def _validate(c: Circuit) -> None:
    seen: dict[str, str] = {}
    for n in c.nodes:
        if not _IDENT.match(n.name):
            raise NetlistSyntaxError(f"invalid identifier {n.name!r}")
        if n.name in seen:
            raise DuplicateNameError(f"duplicate name {n.name!r}")
        seen[n.name] = "node"
    for d in c.devices:
        if not _IDENT.match(d.id):
            raise NetlistSyntaxError(f"invalid identifier {d.id!r}")
        if d.id in seen:
            raise DuplicateNameError(f"duplicate name {d.id!r}")
        seen[d.id] = "fet"
        for ref in (d.src, d.drn, d.cg, d.pg):
            if not c.has_node(ref):
                raise DanglingReferenceError(
                    f"device {d.id!r} references undeclared node {ref!r}")
        if d.src == d.drn:
            raise SelfLoopError(f"device {d.id!r} has src=drn ({d.src!r})")


def device_count(c: Circuit) -> int:
    """Number of devices; also the area proxy used in comparisons."""
    return len(c.devices)


def area_reduction(c: Circuit, baseline: Circuit) -> float:
    """Fractional area reduction of ``c`` relative to ``baseline``."""
    base = device_count(baseline)
    if base == 0:
        raise ValueError("baseline circuit has no devices")
    return 1.0 - device_count(c) / base


def serialize_netlist(c: Circuit) -> str:
    """Canonical text form: declarations in stored order, one per line,
    lowercase keywords, single spaces, LF newlines."""
    lines = [f"circuit {c.name}"]
    for n in c.nodes:
        if n.kind == NodeKind.SUPPLY:
            lines.append(f"supply {n.name} {int(n.supply_level)}")
        else:
            lines.append(f"node {n.name} {n.kind.value}")
    for d in c.devices:
        lines.append(
            f"fet {d.id} src={d.src} drn={d.drn} cg={d.cg} pg={d.pg}")
    return "\n".join(lines) + "\n"


def _ident(token: str, lineno: int, col: int) -> str:
    token = token.lower()
    if not _IDENT.match(token):
        raise NetlistSyntaxError(f"invalid identifier {token!r}", lineno, col)
    return token


def _split(line: str) -> list[tuple[str, int]]:
    """Tokens with their 1-based column positions."""
    out = []
    for m in re.finditer(r"\S+", line):
        out.append((m.group(), m.start() + 1))
    return out


def parse_netlist(text: str) -> Circuit:
    """Parse the ``.net`` format into a validated Circuit.

    Raises a NetlistError subclass with a location for every malformed,
    duplicated, dangling or self-looped declaration.
    """
    name: Optional[str] = None
    nodes: list[NodeDecl] = []
    devices: list[DgaFet] = []
    declared: dict[str, int] = {}
    node_names: set[str] = set()

    def declare(ident: str, lineno: int, col: int) -> None:
        if ident in declared:
            raise DuplicateNameError(
                f"duplicate name {ident!r} (first declared on line "
                f"{declared[ident]})", lineno, col)
        declared[ident] = lineno

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = _split(line)
        if not tokens:
            continue
        (kw, kwcol) = tokens[0]
        kw = kw.lower()
        if name is None:
            if kw != "circuit" or len(tokens) != 2:
                raise NetlistSyntaxError(
                    "expected 'circuit NAME' header", lineno, kwcol)
            name = _ident(tokens[1][0], lineno, tokens[1][1])
            continue
        if kw == "node":
            if len(tokens) != 3:
                raise NetlistSyntaxError(
                    "expected 'node NAME in|out|wire'", lineno, kwcol)
            ident = _ident(tokens[1][0], lineno, tokens[1][1])
            kind_tok = tokens[2][0].lower()
            kinds = {"in": NodeKind.INPUT, "out": NodeKind.OUTPUT,
                     "wire": NodeKind.INTERNAL}
            if kind_tok not in kinds:
                raise NetlistSyntaxError(
                    f"unknown node kind {kind_tok!r}", lineno, tokens[2][1])
            declare(ident, lineno, tokens[1][1])
            node_names.add(ident)
            nodes.append(NodeDecl(ident, kinds[kind_tok]))
        elif kw == "supply":
            if len(tokens) != 3 or tokens[2][0] not in ("0", "1"):
                raise NetlistSyntaxError(
                    "expected 'supply NAME 0|1'", lineno, kwcol)
            ident = _ident(tokens[1][0], lineno, tokens[1][1])
            declare(ident, lineno, tokens[1][1])
            node_names.add(ident)
            level = Level.L1 if tokens[2][0] == "1" else Level.L0
            nodes.append(NodeDecl(ident, NodeKind.SUPPLY, level))
        elif kw == "fet":
            if len(tokens) != 6:
                raise NetlistSyntaxError(
                    "expected 'fet NAME src=N drn=N cg=N pg=N'", lineno, kwcol)
            ident = _ident(tokens[1][0], lineno, tokens[1][1])
            declare(ident, lineno, tokens[1][1])
            refs = {}
            for (tok, col), want in zip(tokens[2:], ("src", "drn", "cg", "pg")):
                m = re.match(r"([a-z]+)=(\S+)\Z", tok.lower())
                if not m or m.group(1) != want:
                    raise NetlistSyntaxError(
                        f"expected '{want}=NODE', got {tok!r}", lineno, col)
                refs[want] = _ident(m.group(2), lineno, col)
                if refs[want] not in node_names:
                    raise DanglingReferenceError(
                        f"undeclared node {refs[want]!r}", lineno, col)
            if refs["src"] == refs["drn"]:
                raise SelfLoopError(
                    f"device {ident!r} has src=drn ({refs['src']!r})",
                    lineno, kwcol)
            devices.append(DgaFet(ident, refs["src"], refs["drn"],
                                  refs["cg"], refs["pg"]))
        else:
            raise NetlistSyntaxError(
                f"unknown declaration {kw!r}", lineno, kwcol)

    if name is None:
        raise NetlistSyntaxError("empty netlist: missing circuit header", 1, 1)
    return Circuit(name, tuple(nodes), tuple(devices))
