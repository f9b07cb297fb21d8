"""Benchmark harness: seeded random workloads over the adder family,
per-configuration delay/energy averages, EDP/AEDP, and ratio reports.

Workload bits come from NumPy's PCG64 generator, one fair draw per
(vector, input) in row-major order, so a (seed, input list, length) triple
regenerates bit-identically anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Optional, Sequence

import numpy as np

from .engine import DEFAULT_PARAMS, OscillationError, TimingEnergyParams, \
    run_waveform_array
from .library import Cascade, Style, gen_ripple_carry
from .netlist import device_count


@dataclass(frozen=True)
class Workload:
    """Deterministic random input sequence over named (logical) inputs."""

    seed: int
    input_names: tuple[str, ...]
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.vectors)

    def as_maps(self) -> list[dict[str, int]]:
        return [{nm: int(v) for nm, v in zip(self.input_names, row)}
                for row in self.vectors]


def gen_workload(seed: int, input_names: Sequence[str],
                 length: int) -> Workload:
    if not input_names:
        raise ValueError("input name list must be nonempty")
    if length < 1:
        raise ValueError("workload length must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = rng.integers(0, 2, size=(length, len(input_names)),
                           dtype=np.uint8)
    vectors.setflags(write=False)
    return Workload(int(seed), tuple(input_names), vectors)


@dataclass(frozen=True)
class RatioRecord:
    delay: float
    energy: float
    edp: float
    aedp: float

    def to_dict(self) -> dict:
        return {"delay": self.delay, "energy": self.energy,
                "edp": self.edp, "aedp": self.aedp}


@dataclass(frozen=True)
class BenchRow:
    style: Style
    cascade: Cascade
    device_count: int
    avg_delay: float
    avg_energy: float
    edp: float
    aedp: float
    vs_baseline: Optional[RatioRecord] = None


@dataclass(frozen=True)
class BenchReport:
    bits: int
    seed: int
    params: TimingEnergyParams
    rows: tuple[BenchRow, ...]

    def row(self, style: Style, cascade: Cascade) -> BenchRow:
        for r in self.rows:
            if r.style == style and r.cascade == cascade:
                return r
        raise KeyError(f"no row for ({style.value}, {cascade.value})")

    def to_dict(self) -> dict:
        return {
            "bits": self.bits,
            "seed": self.seed,
            "params": self.params.to_dict(),
            "rows": [{
                "style": r.style.value,
                "cascade": r.cascade.value,
                "device_count": r.device_count,
                "avg_delay": r.avg_delay,
                "avg_energy": r.avg_energy,
                "edp": r.edp,
                "aedp": r.aedp,
                "vs_baseline": r.vs_baseline.to_dict()
                if r.vs_baseline else None,
            } for r in self.rows],
        }

    def write_json(self, f: IO[str]) -> None:
        json.dump(self.to_dict(), f, indent=2)
        f.write("\n")

    def write_csv(self, f: IO[str]) -> None:
        f.write("style,cascade,device_count,avg_delay,avg_energy,edp,aedp,"
                "vs_delay,vs_energy,vs_edp,vs_aedp\n")
        for r in self.rows:
            vs = r.vs_baseline
            ratios = (f"{vs.delay!r},{vs.energy!r},{vs.edp!r},{vs.aedp!r}"
                      if vs else ",,,")
            f.write(f"{r.style.value},{r.cascade.value},{r.device_count},"
                    f"{r.avg_delay!r},{r.avg_energy!r},{r.edp!r},"
                    f"{r.aedp!r},{ratios}\n")


def _expand_columns(circuit, workload: Workload) -> np.ndarray:
    """Level matrix over the circuit's full input set, deriving complement
    ports (``xb`` mirrors ``x``) from the logical workload columns."""
    order = {nm: j for j, nm in enumerate(workload.input_names)}
    cols = []
    flips = []
    for nm in circuit.inputs():
        if nm in order:
            cols.append(order[nm])
            flips.append(0)
        elif nm.endswith("b") and nm[:-1] in order:
            cols.append(order[nm[:-1]])
            flips.append(1)
        else:
            raise ValueError(
                f"workload does not cover input {nm!r} of {circuit.name!r}")
    return workload.vectors[:, cols] ^ np.array(flips, np.uint8)


def run_bench(configs: Sequence[tuple[Style, Cascade]], bits: int,
              workload: Workload,
              params: TimingEnergyParams = DEFAULT_PARAMS) -> BenchReport:
    """Run the workload over each configuration's ripple-carry adder.

    Average delay is taken over operations with at least one output
    transition (a no-op operation has no propagation to time); average
    energy is taken over all operations. A baseline row is prepended when
    the config list lacks one, so every row carries ratios against the
    CMOS-like reference.
    """
    configs = list(configs)
    if not any(s == Style.BASELINE for s, _ in configs):
        configs.insert(0, (Style.BASELINE, Cascade.CG))

    raw = []
    for style, cascade in configs:
        circuit = gen_ripple_carry(style, cascade, bits)
        mat = _expand_columns(circuit, workload)
        try:
            trace = run_waveform_array(circuit, list(circuit.inputs()), mat,
                                       params, record=False)
        except OscillationError as exc:
            raise OscillationError(
                f"{exc} [config {style.value}-{cascade.value}]",
                vector_index=exc.vector_index) from exc
        changed = trace.output_changed
        avg_delay = float(trace.delays[changed].mean()) if changed.any() \
            else 0.0
        avg_energy = float(trace.energies.mean())
        n = device_count(circuit)
        raw.append((style, cascade, n, avg_delay, avg_energy,
                    avg_delay * avg_energy, n * avg_delay * avg_energy))

    base = next(r for r in raw if r[0] == Style.BASELINE)
    rows = []
    for style, cascade, n, d, e, edp, aedp in raw:
        vs = RatioRecord(d / base[3], e / base[4],
                         edp / base[5], aedp / base[6])
        rows.append(BenchRow(style, cascade, n, d, e, edp, aedp, vs))
    return BenchReport(bits, workload.seed, params, tuple(rows))


def compare(report: BenchReport, config_a: tuple[Style, Cascade],
            config_b: tuple[Style, Cascade]) -> RatioRecord:
    """Metric ratios a/b between two configurations of a report."""
    ra = report.row(*config_a)
    rb = report.row(*config_b)
    return RatioRecord(ra.avg_delay / rb.avg_delay,
                       ra.avg_energy / rb.avg_energy,
                       ra.edp / rb.edp,
                       ra.aedp / rb.aedp)


DEFAULT_CONFIGS: tuple[tuple[Style, Cascade], ...] = (
    (Style.BASELINE, Cascade.CG),
    (Style.TYPE1, Cascade.CG), (Style.TYPE1, Cascade.PG),
    (Style.TYPE2, Cascade.CG), (Style.TYPE2, Cascade.PG),
    (Style.TYPE3, Cascade.CG), (Style.TYPE3, Cascade.PG),
)
