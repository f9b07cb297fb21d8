"""Steady-state and event-driven simulation of a circuit.

``settle`` finds the zero-delay fixed point of the switch-level rules;
``step_vector``/``run_waveform`` run the event-driven timing and energy
model on top of the same per-component relaxation. Circuits are compiled
once into flat arrays (channel-connected components, fanout tables) and the
heavy lifting happens in :mod:`aptlsim._kernels`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterable, Mapping, Optional, Sequence

import numpy as np

from . import _kernels as K
from .netlist import Circuit, NetlistError, NodeKind
from .signal_core import Level, Signal, Strength


class OscillationError(Exception):
    """No fixed point / the event queue refused to drain (combinational
    loop or drive fight)."""

    def __init__(self, message: str, vector_index: Optional[int] = None):
        self.vector_index = vector_index
        super().__init__(message)


@dataclass(frozen=True)
class TimingEnergyParams:
    """Parametric delay/energy model, in arbitrary time and energy units.

    tau_cg/tau_pg delay a component re-evaluation after a control- or
    polarity-gate toggle, tau_pass after a channel-side change; k_weak
    scales gate delays driven by a weak signal. e_cg/e_pg price each gate
    terminal hanging off a toggling node, e_node the toggle itself.
    """

    tau_cg: float = 1.0
    tau_pg: float = 1.6
    tau_pass: float = 0.5
    k_weak: float = 1.5
    e_cg: float = 1.0
    e_pg: float = 0.6
    e_node: float = 0.5

    def __post_init__(self):
        if self.tau_cg <= 0 or self.tau_pg <= 0:
            raise ValueError("gate delays must be positive")
        if self.tau_pass < 0:
            raise ValueError("tau_pass must be nonnegative")
        if self.k_weak < 1:
            raise ValueError("k_weak must be >= 1")
        if min(self.e_cg, self.e_pg, self.e_node) < 0:
            raise ValueError("energies must be nonnegative")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "tau_cg", "tau_pg", "tau_pass", "k_weak",
            "e_cg", "e_pg", "e_node")}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TimingEnergyParams":
        return cls(**{k: float(v) for k, v in d.items()})

    def save(self, f: IO[str]) -> None:
        json.dump(self.to_dict(), f, indent=2)
        f.write("\n")

    @classmethod
    def load(cls, f: IO[str]) -> "TimingEnergyParams":
        return cls.from_dict(json.load(f))


DEFAULT_PARAMS = TimingEnergyParams()


@dataclass(frozen=True)
class CompiledCircuit:
    """Array form of a circuit plus its static channel-component partition."""

    circuit: Circuit
    node_names: tuple[str, ...]
    node_index: dict
    is_input: np.ndarray
    is_output: np.ndarray
    is_supply: np.ndarray
    dev_src: np.ndarray
    dev_drn: np.ndarray
    dev_cg: np.ndarray
    dev_pg: np.ndarray
    dev_ccc: np.ndarray
    node_ccc: np.ndarray
    ccc_rep: np.ndarray
    ccc_node_ptr: np.ndarray
    ccc_node: np.ndarray
    ccc_dev_ptr: np.ndarray
    ccc_dev: np.ndarray
    ch_ptr: np.ndarray
    ch_dev: np.ndarray
    cg_ptr: np.ndarray
    cg_dev: np.ndarray
    pg_ptr: np.ndarray
    pg_dev: np.ndarray
    max_ccc: int
    supply_levels: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.node_names)

    @property
    def n_devices(self) -> int:
        return len(self.dev_src)

    @property
    def max_sweeps(self) -> int:
        return 2 + 4 * self.n_devices

    @property
    def pop_bound(self) -> int:
        return self.max_sweeps * max(self.n_devices, 1)

    def scratch(self):
        """Fresh per-call work arrays (kept call-local for thread safety)."""
        cap = 3 * self.max_ccc + 4
        return (np.zeros(self.n_nodes, np.int32),          # slot_of
                np.zeros(self.n_devices, np.int8),          # dev_pol
                np.zeros(self.n_devices, np.int8),          # dev_cond
                np.zeros((self.max_ccc, 3), np.int8),       # best
                np.zeros((3, cap), np.int32),               # bnode
                np.zeros((3, cap), np.int8),                # blevel
                np.zeros(3, np.int32),                      # bcount
                np.zeros(self.max_ccc, np.int8),            # out_level
                np.zeros(self.max_ccc, np.int8))            # out_strength

    def gate_fanout(self, node: str) -> tuple[int, int]:
        """(control-gate, polarity-gate) terminal counts hanging on a node."""
        n = self.node_index[node]
        return (int(self.cg_ptr[n + 1] - self.cg_ptr[n]),
                int(self.pg_ptr[n + 1] - self.pg_ptr[n]))


def _csr(n_keys: int, pairs: list[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """CSR arrays from (key, value) pairs, preserving pair order per key."""
    ptr = np.zeros(n_keys + 1, np.int32)
    for k, _ in pairs:
        ptr[k + 1] += 1
    ptr = np.cumsum(ptr).astype(np.int32)
    out = np.zeros(len(pairs), np.int32)
    fill = ptr[:-1].copy()
    for k, v in pairs:
        out[fill[k]] = v
        fill[k] += 1
    return ptr, out


@lru_cache(maxsize=128)
def compile_circuit(circuit: Circuit) -> CompiledCircuit:
    """Index nodes/devices and partition the channel graph.

    Components are formed by src/drn adjacency between non-supply nodes;
    supplies never merge components, they act as drivers at the edge.
    """
    names = tuple(n.name for n in circuit.nodes)
    index = {nm: i for i, nm in enumerate(names)}
    nn = len(names)
    nd = len(circuit.devices)
    if not any(n.kind == NodeKind.INPUT for n in circuit.nodes):
        raise NetlistError(f"circuit {circuit.name!r} has no input nodes")
    if not any(n.kind == NodeKind.OUTPUT for n in circuit.nodes):
        raise NetlistError(f"circuit {circuit.name!r} has no output nodes")

    is_input = np.zeros(nn, np.uint8)
    is_output = np.zeros(nn, np.uint8)
    is_supply = np.zeros(nn, np.uint8)
    supply_levels = np.full(nn, K.LX, np.int8)
    for i, n in enumerate(circuit.nodes):
        if n.kind == NodeKind.INPUT:
            is_input[i] = 1
        elif n.kind == NodeKind.OUTPUT:
            is_output[i] = 1
        elif n.kind == NodeKind.SUPPLY:
            is_supply[i] = 1
            supply_levels[i] = int(n.supply_level)

    dev_src = np.array([index[d.src] for d in circuit.devices], np.int32)
    dev_drn = np.array([index[d.drn] for d in circuit.devices], np.int32)
    dev_cg = np.array([index[d.cg] for d in circuit.devices], np.int32)
    dev_pg = np.array([index[d.pg] for d in circuit.devices], np.int32)

    # Union-find over channel edges between non-supply nodes.
    parent = list(range(nn))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for d in range(nd):
        a, b = dev_src[d], dev_drn[d]
        if is_supply[a] or is_supply[b]:
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    roots = sorted({find(i) for i in range(nn) if not is_supply[i]})
    ccc_of_root = {r: ci for ci, r in enumerate(roots)}
    node_ccc = np.full(nn, -1, np.int32)
    members: list[list[int]] = [[] for _ in roots]
    for i in range(nn):
        if is_supply[i]:
            continue
        ci = ccc_of_root[find(i)]
        node_ccc[i] = ci
        members[ci].append(i)
    ccc_rep = np.array([m[0] for m in members], np.int32) \
        if members else np.zeros(0, np.int32)

    node_pairs = [(ci, n) for ci, ms in enumerate(members) for n in ms]
    ccc_node_ptr, ccc_node = _csr(len(members), node_pairs)

    dev_ccc = np.full(nd, -1, np.int32)
    dev_pairs = []
    for d in range(nd):
        a, b = dev_src[d], dev_drn[d]
        n = a if not is_supply[a] else (b if not is_supply[b] else -1)
        if n >= 0:
            dev_ccc[d] = node_ccc[n]
            dev_pairs.append((int(node_ccc[n]), d))
    ccc_dev_ptr, ccc_dev = _csr(len(members), sorted(dev_pairs))

    ch_pairs = []
    for d in range(nd):
        for n in (dev_src[d], dev_drn[d]):
            if not is_supply[n]:
                ch_pairs.append((int(n), d))
    ch_ptr, ch_dev = _csr(nn, sorted(ch_pairs))

    cg_ptr, cg_dev = _csr(nn, sorted((int(dev_cg[d]), d) for d in range(nd)))
    pg_ptr, pg_dev = _csr(nn, sorted((int(dev_pg[d]), d) for d in range(nd)))

    max_ccc = max((len(m) for m in members), default=0)
    return CompiledCircuit(
        circuit=circuit, node_names=names, node_index=index,
        is_input=is_input, is_output=is_output, is_supply=is_supply,
        dev_src=dev_src, dev_drn=dev_drn, dev_cg=dev_cg, dev_pg=dev_pg,
        dev_ccc=dev_ccc, node_ccc=node_ccc, ccc_rep=ccc_rep,
        ccc_node_ptr=ccc_node_ptr, ccc_node=ccc_node,
        ccc_dev_ptr=ccc_dev_ptr, ccc_dev=ccc_dev,
        ch_ptr=ch_ptr, ch_dev=ch_dev,
        cg_ptr=cg_ptr, cg_dev=cg_dev, pg_ptr=pg_ptr, pg_dev=pg_dev,
        max_ccc=max_ccc, supply_levels=supply_levels)


@dataclass
class SimState:
    """Mutable per-node signal state of one simulation.

    Owned by a single execution at a time; the compiled circuit it points
    at is immutable and shared freely.
    """

    compiled: CompiledCircuit
    level: np.ndarray
    strength: np.ndarray
    ext_level: np.ndarray
    last_change: np.ndarray
    eff_cg: np.ndarray
    eff_pg: np.ndarray
    energy: float = 0.0

    @classmethod
    def initial(cls, compiled: CompiledCircuit) -> "SimState":
        nn = compiled.n_nodes
        level = np.full(nn, K.LX, np.int8)
        strength = np.full(nn, K.FLOATING, np.int8)
        sup = compiled.is_supply.astype(bool)
        level[sup] = compiled.supply_levels[sup]
        strength[sup] = K.STRONG
        return cls(compiled, level, strength,
                   np.full(nn, K.LX, np.int8),
                   np.full(nn, -np.inf, np.float64),
                   level[compiled.dev_cg].copy(),
                   level[compiled.dev_pg].copy())

    def copy(self) -> "SimState":
        return SimState(self.compiled, self.level.copy(),
                        self.strength.copy(), self.ext_level.copy(),
                        self.last_change.copy(), self.eff_cg.copy(),
                        self.eff_pg.copy(), self.energy)

    def signal(self, name: str) -> Signal:
        i = self.compiled.node_index[name]
        return Signal(Level(int(self.level[i])),
                      Strength(int(self.strength[i])))

    def signals(self) -> dict[str, Signal]:
        return {nm: self.signal(nm) for nm in self.compiled.node_names}

    def poke(self, name: str, level: Level,
             strength: Strength = Strength.CHARGED) -> None:
        """Force a retained value onto a node, as if it had settled there
        (debugging/test hook). Gated devices see the poked level."""
        i = self.compiled.node_index[name]
        self.level[i] = int(level)
        self.strength[i] = int(strength)
        self.eff_cg[self.compiled.dev_cg == i] = int(level)
        self.eff_pg[self.compiled.dev_pg == i] = int(level)


@dataclass(frozen=True)
class TraceEvent:
    time: float
    node: str
    level: Level
    strength: Strength


@dataclass
class Trace:
    """Committed events plus per-vector summaries of one waveform run."""

    compiled: CompiledCircuit
    ev_time: np.ndarray
    ev_node: np.ndarray
    ev_level: np.ndarray
    ev_strength: np.ndarray
    t0s: np.ndarray
    delays: np.ndarray
    energies: np.ndarray
    output_changed: np.ndarray
    spacing: float

    @property
    def events(self) -> list[TraceEvent]:
        names = self.compiled.node_names
        return [TraceEvent(float(t), names[n], Level(int(l)),
                           Strength(int(s)))
                for t, n, l, s in zip(self.ev_time, self.ev_node,
                                      self.ev_level, self.ev_strength)]

    @property
    def total_energy(self) -> float:
        return float(self.energies.sum())


_LEVEL_STR = {K.L0: "0", K.L1: "1", K.LX: "x"}
_STRENGTH_STR = {K.STRONG: "strong", K.WEAK: "weak",
                 K.CHARGED: "charged", K.FLOATING: "floating"}


def write_trace_csv(trace: Trace, f: IO[str]) -> None:
    """Event rows, then one trailing JSON object with per-vector summaries."""
    f.write("time,node,level,strength\n")
    names = trace.compiled.node_names
    for t, n, l, s in zip(trace.ev_time, trace.ev_node,
                          trace.ev_level, trace.ev_strength):
        f.write(f"{t!r},{names[n]},{_LEVEL_STR[int(l)]},"
                f"{_STRENGTH_STR[int(s)]}\n")
    summary = {
        "spacing": trace.spacing,
        "vectors": [
            {"vector_index": i, "delay": float(d), "energy": float(e)}
            for i, (d, e) in enumerate(zip(trace.delays, trace.energies))],
        "total_energy": trace.total_energy,
    }
    f.write(json.dumps(summary) + "\n")


def write_summary_csv(trace: Trace, f: IO[str]) -> None:
    f.write("vector_index,delay,energy\n")
    for i, (d, e) in enumerate(zip(trace.delays, trace.energies)):
        f.write(f"{i},{d!r},{e!r}\n")


def _coerce_level(v) -> int:
    lv = int(v)
    if lv not in (0, 1):
        raise ValueError(f"input level must be 0 or 1, got {v!r}")
    return lv


def _input_vector(compiled: CompiledCircuit,
                  inputs: Mapping[str, object],
                  require_all: bool) -> tuple[np.ndarray, np.ndarray]:
    idx = []
    lvls = []
    for name in inputs:
        if name not in compiled.node_index:
            raise ValueError(f"unknown input node {name!r}")
        i = compiled.node_index[name]
        if not compiled.is_input[i]:
            raise ValueError(f"node {name!r} is not an input")
    for i, name in enumerate(compiled.node_names):
        if not compiled.is_input[i]:
            continue
        if name in inputs:
            idx.append(i)
            lvls.append(_coerce_level(inputs[name]))
        elif require_all:
            raise ValueError(f"input {name!r} not covered by vector")
    return (np.array(idx, np.int32),
            np.array(lvls, np.uint8).reshape(1, -1))


def settle(circuit: Circuit, inputs: Mapping[str, object],
           prior: Optional[SimState] = None) -> SimState:
    """Zero-delay fixed point of the circuit under the given input levels.

    Every input node must be assigned 0 or 1. Nodes left undriven keep the
    prior state's level at charged strength; with no prior they float.
    Raises OscillationError when no fixed point exists.
    """
    cc = compile_circuit(circuit)
    state = prior.copy() if prior is not None else SimState.initial(cc)
    vec_nodes, vec = _input_vector(cc, inputs, require_all=True)
    state.ext_level[vec_nodes] = vec[0]
    state.level[vec_nodes] = vec[0]
    state.strength[vec_nodes] = K.STRONG
    status = K.settle_kernel(
        state.level, state.strength, state.ext_level,
        state.eff_cg, state.eff_pg,
        cc.is_input, cc.is_supply,
        cc.dev_src, cc.dev_drn, cc.dev_cg, cc.dev_pg,
        cc.ccc_node_ptr, cc.ccc_node, cc.ccc_dev_ptr, cc.ccc_dev,
        cc.ch_ptr, cc.ch_dev,
        *cc.scratch(),
        np.empty(cc.n_nodes, np.int8), np.empty(cc.n_nodes, np.int8),
        cc.max_sweeps)
    if status != 0:
        raise OscillationError(
            f"no fixed point within {cc.max_sweeps} sweeps "
            f"(circuit {circuit.name!r})")
    return state


def _run(cc: CompiledCircuit, state: SimState, vec_nodes: np.ndarray,
         vectors: np.ndarray, t_start: float, spacing: float,
         params: TimingEnergyParams, record: bool):
    """One kernel invocation with buffer-growth retries. Mutates state."""
    nv = len(vectors)
    tr_cap = 1024 + 8 * cc.n_nodes * nv if record else 1
    h_cap = 256 + 16 * cc.n_devices
    base = state.copy()
    while True:
        state.level[:] = base.level
        state.strength[:] = base.strength
        state.ext_level[:] = base.ext_level
        state.last_change[:] = base.last_change
        state.eff_cg[:] = base.eff_cg
        state.eff_pg[:] = base.eff_pg
        tr_time = np.empty(tr_cap, np.float64)
        tr_node = np.empty(tr_cap, np.int32)
        tr_level = np.empty(tr_cap, np.int8)
        tr_strength = np.empty(tr_cap, np.int8)
        v_delay = np.zeros(nv, np.float64)
        v_energy = np.zeros(nv, np.float64)
        status, info, tr_count = K.run_vectors_kernel(
            state.level, state.strength, state.ext_level, state.last_change,
            state.eff_cg, state.eff_pg,
            cc.is_input, cc.is_output, cc.is_supply,
            cc.dev_src, cc.dev_drn, cc.dev_cg, cc.dev_pg, cc.dev_ccc,
            cc.node_ccc, cc.ccc_rep,
            cc.ccc_node_ptr, cc.ccc_node, cc.ccc_dev_ptr, cc.ccc_dev,
            cc.ch_ptr, cc.ch_dev, cc.cg_ptr, cc.cg_dev, cc.pg_ptr, cc.pg_dev,
            *cc.scratch(),
            vec_nodes, vectors,
            float(t_start), float(spacing),
            params.tau_cg, params.tau_pg, params.tau_pass, params.k_weak,
            params.e_cg, params.e_pg, params.e_node,
            cc.pop_bound, record,
            tr_time, tr_node, tr_level, tr_strength,
            np.empty(h_cap, np.float64), np.empty(h_cap, np.int32),
            np.empty(h_cap, np.int64), np.empty(h_cap, np.int32),
            np.empty(h_cap, np.int8), np.empty(h_cap, np.int8),
            np.empty(h_cap, np.int64),
            v_delay, v_energy)
        if status == K.TRACE_OVERFLOW:
            tr_cap *= 2
            continue
        if status == K.HEAP_OVERFLOW:
            h_cap *= 2
            continue
        if status == K.OSCILLATION:
            raise OscillationError(
                f"event queue did not drain within {cc.pop_bound} "
                f"evaluations at vector {info}", vector_index=int(info))
        state.energy += float(v_energy.sum())
        changed = v_delay >= 0.0
        delays = np.where(changed, v_delay, 0.0)
        return (tr_time[:tr_count].copy(), tr_node[:tr_count].copy(),
                tr_level[:tr_count].copy(), tr_strength[:tr_count].copy(),
                delays, v_energy, changed)


def step_vector(circuit: Circuit, state: SimState, t0: float,
                inputs: Mapping[str, object],
                params: TimingEnergyParams = DEFAULT_PARAMS,
                record: bool = True) -> tuple[SimState, Trace]:
    """Apply one input vector at time t0 to a settled state.

    Returns the post-step state (the argument is left untouched) and a
    single-vector trace fragment of the committed events.
    """
    cc = compile_circuit(circuit)
    if state.compiled is not cc and state.compiled.circuit != circuit:
        raise ValueError("state belongs to a different circuit")
    vec_nodes, vectors = _input_vector(cc, inputs, require_all=False)
    new_state = state.copy()
    (et, en, el, es, delays, energies, changed) = _run(
        cc, new_state, vec_nodes, vectors, t0, 1.0, params, record)
    trace = Trace(cc, et, en, el, es,
                  t0s=np.array([t0]), delays=delays, energies=energies,
                  output_changed=changed, spacing=0.0)
    return new_state, trace


def run_waveform_array(circuit: Circuit, input_names: Sequence[str],
                       levels: np.ndarray,
                       params: TimingEnergyParams = DEFAULT_PARAMS,
                       record: bool = True) -> Trace:
    """Array form of :func:`run_waveform`: ``levels[i, j]`` is the level of
    ``input_names[j]`` in vector i. The named inputs must cover the
    circuit's inputs exactly."""
    levels = np.ascontiguousarray(levels, np.uint8)
    if levels.ndim != 2 or levels.shape[0] == 0:
        raise ValueError("vector list must be nonempty")
    if levels.shape[1] != len(input_names):
        raise ValueError("level matrix does not match input names")
    cc = compile_circuit(circuit)
    first = {nm: int(levels[0, j]) for j, nm in enumerate(input_names)}
    mat_nodes, _ = _input_vector(cc, first, require_all=True)
    order = {nm: j for j, nm in enumerate(input_names)}
    cols = [order[cc.node_names[i]] for i in mat_nodes]
    mat = levels[:, cols]

    state0 = settle(circuit, first)
    spacing = 10.0
    while True:
        state = state0.copy()
        (et, en, el, es, delays, energies, changed) = _run(
            cc, state, mat_nodes, mat, 0.0, spacing, params, record)
        worst = float(delays.max()) if len(delays) else 0.0
        if spacing >= 2.0 * worst:
            break
        while spacing < 2.0 * worst:
            spacing *= 2.0
    t0s = spacing * np.arange(len(levels), dtype=np.float64)
    return Trace(cc, et, en, el, es, t0s=t0s, delays=delays,
                 energies=energies, output_changed=changed, spacing=spacing)


def run_waveform(circuit: Circuit,
                 vectors: Sequence[Mapping[str, object]],
                 params: TimingEnergyParams = DEFAULT_PARAMS,
                 record: bool = True) -> Trace:
    """Apply a vector sequence at a uniform spacing and trace the response.

    The state is initialised by settling the first vector, so vector 0
    causes no events; subsequent vectors run event-driven at times
    i*spacing. The spacing starts at 10 time units and the whole run is
    repeated with doubled spacing until it is at least twice the worst
    observed settle time, keeping operations from overlapping.
    """
    if len(vectors) == 0:
        raise ValueError("vector list must be nonempty")
    keys: Optional[set] = None
    for v in vectors:
        if keys is None:
            keys = set(v)
        elif set(v) != keys:
            raise ValueError("all vectors must assign the same input set")
    names = sorted(keys)
    mat = np.zeros((len(vectors), len(names)), np.uint8)
    for r, v in enumerate(vectors):
        for j, nm in enumerate(names):
            mat[r, j] = _coerce_level(v[nm])
    return run_waveform_array(circuit, names, mat, params, record)


def accumulate_energy(circuit: Circuit, events: Iterable[TraceEvent],
                      params: TimingEnergyParams = DEFAULT_PARAMS) -> float:
    """Energy of a committed event list under the parametric model.

    Each committed level change costs e_node plus the gate-terminal loads
    hanging on the changed node. This recomputes from the event list and
    fanout tables, independent of the kernel's running total.
    """
    cc = compile_circuit(circuit)
    total = 0.0
    for ev in events:
        ncg, npg = cc.gate_fanout(ev.node)
        total += params.e_node + params.e_cg * ncg + params.e_pg * npg
    return total
