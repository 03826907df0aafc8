"""State-vector storage, initialization, tensor combination and memory accounting.

Amplitude index ``i`` holds the coefficient of basis state ``|i>`` with a
little-endian qubit ordering: bit ``b`` of ``i`` is the value of qubit ``b``.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 30
DEFAULT_MEMORY_BUDGET = 8 * 2**30
BUDGET_ENV = "SVSIM_MEMORY_BUDGET"


class CapacityError(MemoryError):
    """Raised when a state would exceed the configured memory budget."""

    def __init__(self, n_qubits: int, required: int, budget: int, reason: str = ""):
        self.n_qubits = n_qubits
        self.required = required
        self.budget = budget
        msg = (
            f"{n_qubits}-qubit state requires {required:,} bytes, "
            f"memory budget is {budget:,} bytes"
        )
        if reason:
            msg = f"{msg} ({reason})"
        super().__init__(msg)


class Precision(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"

    @property
    def amplitude_bytes(self) -> int:
        return 8 if self is Precision.SINGLE else 16

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.complex64 if self is Precision.SINGLE else np.complex128)

    @property
    def norm_tolerance(self) -> float:
        return 1e-4 if self is Precision.SINGLE else 1e-9

    @classmethod
    def parse(cls, value: "str | Precision") -> "Precision":
        if isinstance(value, Precision):
            return value
        aliases = {"sp": "single", "dp": "double", "float": "single", "complex64": "single",
                   "complex128": "double"}
        value = aliases.get(value.lower(), value.lower())
        return cls(value)

    @classmethod
    def of(cls, array: np.ndarray) -> "Precision":
        if array.dtype == np.complex64:
            return cls.SINGLE
        if array.dtype == np.complex128:
            return cls.DOUBLE
        raise TypeError(f"unsupported amplitude dtype {array.dtype}")


def memory_budget() -> int:
    """Active budget in bytes; the ``SVSIM_MEMORY_BUDGET`` env var overrides the default."""
    raw = os.environ.get(BUDGET_ENV)
    if not raw:
        return DEFAULT_MEMORY_BUDGET
    return int(float(raw))


def memory_bytes(n_qubits: int, precision: Precision) -> int:
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    return (1 << n_qubits) * Precision.parse(precision).amplitude_bytes


def check_capacity(n_qubits: int, precision: Precision, budget: int | None = None,
                   max_qubits: int = MAX_QUBITS) -> int:
    """Return the byte size of an ``n_qubits`` state or raise :class:`CapacityError`."""
    budget = memory_budget() if budget is None else budget
    required = memory_bytes(n_qubits, precision)
    if n_qubits > max_qubits:
        raise CapacityError(n_qubits, required, budget, f"maximum is {max_qubits} qubits")
    if required > budget:
        raise CapacityError(n_qubits, required, budget)
    return required


@dataclass
class StateVector:
    n_qubits: int
    precision: Precision
    amplitudes: np.ndarray

    def __post_init__(self):
        self.precision = Precision.parse(self.precision)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )
        if self.amplitudes.dtype != self.precision.dtype:
            raise TypeError(f"amplitudes must be {self.precision.dtype}")

    @classmethod
    def from_array(cls, amplitudes, precision: Precision | str | None = None) -> "StateVector":
        arr = np.asarray(amplitudes)
        if precision is None:
            precision = Precision.of(arr) if np.iscomplexobj(arr) else Precision.DOUBLE
        precision = Precision.parse(precision)
        arr = np.ascontiguousarray(arr, dtype=precision.dtype)
        n = arr.size.bit_length() - 1
        if arr.ndim != 1 or arr.size != 1 << n or n < 1:
            raise ValueError("amplitude array length must be a power of two >= 2")
        return cls(n, precision, arr)

    def __len__(self) -> int:
        return self.amplitudes.size

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.precision, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real.astype(np.float64) ** 2 + a.imag.astype(np.float64) ** 2

    @property
    def nbytes(self) -> int:
        return self.amplitudes.nbytes


def init_zero_state(n_qubits: int, precision: Precision | str = Precision.DOUBLE,
                    budget: int | None = None) -> StateVector:
    precision = Precision.parse(precision)
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    check_capacity(n_qubits, precision, budget)
    amps = np.zeros(1 << n_qubits, dtype=precision.dtype)
    amps[0] = 1
    return StateVector(n_qubits, precision, amps)


def tensor_combine(a: StateVector, b: StateVector, budget: int | None = None) -> StateVector:
    """Kronecker product ``a (x) b``: ``result[i * 2**n_b + j] = a[i] * b[j]``.

    ``b`` occupies the low qubits of the result, ``a`` the high ones.
    """
    if a.precision is not b.precision:
        raise ValueError(f"precision mismatch: {a.precision.value} vs {b.precision.value}")
    n = a.n_qubits + b.n_qubits
    check_capacity(n, a.precision, budget)
    out = np.multiply.outer(a.amplitudes, b.amplitudes).reshape(-1)
    return StateVector(n, a.precision, out.astype(a.precision.dtype, copy=False))


def norm_sq(s: StateVector | np.ndarray) -> float:
    amps = s.amplitudes if isinstance(s, StateVector) else np.asarray(s)
    a = amps.astype(np.complex128, copy=False)
    return float(np.vdot(a, a).real)
