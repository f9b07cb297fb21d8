"""Command-line front end: circuit generation, simulation, truth-table
verification, benchmarking and calibration.

Exit codes: 0 success, 1 usage/data error, 2 simulation error
(oscillation), 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .bench import DEFAULT_CONFIGS, gen_workload, run_bench
from .calibrate import CalibrationTargets, fit
from .engine import DEFAULT_PARAMS, OscillationError, TimingEnergyParams, \
    run_waveform, settle, write_trace_csv
from .library import Cascade, Style, adder_input_names, adder_ports, \
    expand_vector, gen_full_adder, gen_ripple_carry
from .netlist import NetlistError, parse_netlist, serialize_netlist

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SIM = 2
EXIT_MISMATCH = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    p = _Parser(prog="aptlsim",
                description="Switch-level toolchain for dual-gate ambipolar "
                            "pass-transistor logic")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an adder netlist")
    g.add_argument("--style", required=True,
                   choices=[s.value for s in Style])
    g.add_argument("--cascade", required=True,
                   choices=[c.value for c in Cascade])
    g.add_argument("--bits", type=int, default=1)
    g.add_argument("--out", required=True)

    s = sub.add_parser("sim", help="simulate a netlist over a vector file")
    s.add_argument("netlist")
    s.add_argument("--vectors", required=True,
                   help="CSV: header of input names, rows of 0/1")
    s.add_argument("--params", help="timing/energy parameter JSON")
    s.add_argument("--trace", required=True,
                   help="output CSV of committed events")

    t = sub.add_parser("truth", help="exhaustively verify against an oracle")
    t.add_argument("netlist")
    t.add_argument("--oracle", required=True, choices=["adder"])
    t.add_argument("--bits", type=int, required=True)

    b = sub.add_parser("bench", help="run the comparison benchmark")
    b.add_argument("--styles", default="baseline,type1,type2,type3")
    b.add_argument("--cascades", default="cg,pg")
    b.add_argument("--bits", type=int, default=4)
    b.add_argument("--ops", type=int, default=1000)
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--params")
    b.add_argument("--out", required=True, help="report JSON path")
    b.add_argument("--csv", help="optional report CSV path")

    c = sub.add_parser("calibrate", help="fit parameters to ratio targets")
    c.add_argument("--targets", required=True, help="targets JSON")
    c.add_argument("--budget", type=int, default=500)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--bits", type=int, default=4)
    c.add_argument("--out", required=True, help="fitted parameter JSON path")
    return p


def _load_params(path: Optional[str]) -> TimingEnergyParams:
    if path is None:
        return DEFAULT_PARAMS
    with open(path) as f:
        return TimingEnergyParams.load(f)


def _read_netlist(path: str):
    with open(path) as f:
        return parse_netlist(f.read())


def _cmd_gen(args) -> int:
    circuit = gen_ripple_carry(Style(args.style), Cascade(args.cascade),
                               args.bits)
    with open(args.out, "w") as f:
        f.write(serialize_netlist(circuit))
    return EXIT_OK


def _read_vectors_csv(path: str) -> list[dict[str, int]]:
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines:
        raise _UsageError(f"empty vector file {path!r}")
    names = [c.strip() for c in lines[0].split(",")]
    vectors = []
    for ln in lines[1:]:
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != len(names):
            raise _UsageError(f"row {len(vectors) + 2} of {path!r} has "
                              f"{len(cells)} cells, expected {len(names)}")
        vectors.append({nm: int(c) for nm, c in zip(names, cells)})
    return vectors


def _cmd_sim(args) -> int:
    circuit = _read_netlist(args.netlist)
    params = _load_params(args.params)
    vectors = [expand_vector(circuit, v)
               for v in _read_vectors_csv(args.vectors)]
    trace = run_waveform(circuit, vectors, params, record=True)
    with open(args.trace, "w") as f:
        write_trace_csv(trace, f)
    return EXIT_OK


def _cmd_truth(args) -> int:
    circuit = _read_netlist(args.netlist)
    bits = args.bits
    ins, outs = adder_ports(circuit, bits)
    mismatches = 0
    for a in range(1 << bits):
        for b in range(1 << bits):
            for cin in range(2):
                if bits == 1:
                    logical = {"a": a, "b": b, "cin": cin}
                else:
                    logical = {f"a{i}": (a >> i) & 1 for i in range(bits)}
                    logical |= {f"b{i}": (b >> i) & 1 for i in range(bits)}
                    logical["cin"] = cin
                state = settle(circuit, expand_vector(circuit, logical))
                total = a + b + cin
                got = 0
                defined = True
                for i, nm in enumerate(outs):
                    lv = int(state.signal(nm).level)
                    if lv > 1:
                        defined = False
                        break
                    got |= lv << i
                if not defined or got != total:
                    mismatches += 1
                    if mismatches <= 10:
                        print(f"mismatch: a={a} b={b} cin={cin} "
                              f"expected {total} got "
                              f"{got if defined else 'undefined'}",
                              file=sys.stderr)
    if mismatches:
        print(f"{mismatches} mismatching vectors", file=sys.stderr)
        return EXIT_MISMATCH
    print(f"ok: {circuit.name} matches {bits}-bit addition on "
          f"{(1 << (2 * bits)) * 2} vectors")
    return EXIT_OK


def _cmd_bench(args) -> int:
    styles = [Style(s.strip()) for s in args.styles.split(",") if s.strip()]
    cascades = [Cascade(c.strip())
                for c in args.cascades.split(",") if c.strip()]
    configs = [(Style.BASELINE, Cascade.CG)] \
        if Style.BASELINE in styles else []
    configs += [(s, c) for s in styles if s != Style.BASELINE
                for c in cascades]
    if not configs:
        configs = list(DEFAULT_CONFIGS)
    params = _load_params(args.params)
    workload = gen_workload(args.seed, adder_input_names(args.bits),
                            args.ops)
    report = run_bench(configs, args.bits, workload, params)
    with open(args.out, "w") as f:
        report.write_json(f)
    if args.csv:
        with open(args.csv, "w") as f:
            report.write_csv(f)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    with open(args.targets) as f:
        targets = CalibrationTargets.load(f)
    result = fit(targets, bits=args.bits, seed=args.seed,
                 budget=args.budget)
    with open(args.out, "w") as f:
        result.params.save(f)
    a = result.achieved
    print(f"objective {result.objective:.6g} after {result.iterations} "
          f"evaluations" + (" (budget exhausted)"
                            if result.budget_exhausted else ""))
    if a is not None:
        print(f"achieved ratios: delay {a.delay:.4f} energy {a.energy:.4f} "
              f"edp {a.edp:.4f} aedp {a.aedp:.4f}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "gen": _cmd_gen, "sim": _cmd_sim, "truth": _cmd_truth,
            "bench": _cmd_bench, "calibrate": _cmd_calibrate,
        }[args.command]
        return handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OscillationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except (NetlistError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
