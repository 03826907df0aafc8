"""State-vector quantum circuit simulator with gate fusion, cache blocking and a roofline cost model."""
__version__ = "0.1.0"

from .core import CapacityError, Precision, StateVector, init_zero_state, memory_bytes
from .circuit import Circuit, CircuitError, Gate, GateKind, stats, validate
from .engine import RunConfig, RunResult, run, sample
from .transpiler import BlockingError, FusionConfig, block_pass, fuse_pass, su4_decompose, sweep_blocking
from .qasm import QasmError, emit, parse, roundtrip_check

__all__ = [
    "BlockingError", "CapacityError", "Circuit", "CircuitError", "FusionConfig", "Gate",
    "GateKind", "Precision", "QasmError", "RunConfig", "RunResult", "StateVector",
    "block_pass", "emit", "fuse_pass", "init_zero_state", "memory_bytes", "parse",
    "roundtrip_check", "run", "sample", "stats", "su4_decompose", "sweep_blocking", "validate",
]
