"""Switch-level simulator, netlist toolchain and benchmark harness for
dual-gate ambipolar FET pass-transistor logic."""

from .signal_core import Conduction, Level, Polarity, Signal, Strength, \
    channel_polarity, conduction, pass_signal, resolve
from .netlist import Circuit, DgaFet, NetlistError, NodeDecl, NodeKind, \
    area_reduction, device_count, parse_netlist, serialize_netlist
from .engine import DEFAULT_PARAMS, OscillationError, SimState, \
    TimingEnergyParams, Trace, TraceEvent, accumulate_energy, \
    compile_circuit, run_waveform, settle, step_vector
from .library import Cascade, Style, XnorVariant, adder_input_names, \
    expand_vector, gen_full_adder, gen_inverter, gen_ripple_carry, gen_xnor, \
    logical_inputs
from .bench import BenchReport, Workload, compare, gen_workload, run_bench
from .calibrate import CalibrationTargets, FitResult, fit, objective

__version__ = "0.1.0"
