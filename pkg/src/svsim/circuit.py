"""Circuit intermediate representation, gate matrices and static statistics."""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

UNITARY_ATOL = 1e-10


class CircuitError(ValueError):
    """A circuit violates a structural rule; ``errors`` lists every violation."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class GateKind(enum.Enum):
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    T = "t"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    P = "p"
    U = "u"
    SQRT_X = "sx"
    SQRT_Y = "sy"
    CX = "cx"
    CZ = "cz"
    CP = "cp"
    CCX = "ccx"
    SWAP = "swap"
    MCX = "mcx"
    MCZ = "mcz"
    SU4 = "su4"
    UNITARY = "unitary"
    MEASURE = "measure"
    BARRIER = "barrier"

    @property
    def is_unitary(self) -> bool:
        return self not in (GateKind.MEASURE, GateKind.BARRIER)


# (number of targets, number of controls or None for "any >= 1", number of params)
_ARITY = {
    GateKind.H: (1, 0, 0), GateKind.X: (1, 0, 0), GateKind.Y: (1, 0, 0),
    GateKind.Z: (1, 0, 0), GateKind.S: (1, 0, 0), GateKind.T: (1, 0, 0),
    GateKind.RX: (1, 0, 1), GateKind.RY: (1, 0, 1), GateKind.RZ: (1, 0, 1),
    GateKind.P: (1, 0, 1), GateKind.U: (1, 0, 3),
    GateKind.SQRT_X: (1, 0, 0), GateKind.SQRT_Y: (1, 0, 0),
    GateKind.CX: (1, 1, 0), GateKind.CZ: (1, 1, 0), GateKind.CP: (1, 1, 1),
    GateKind.CCX: (1, 2, 0), GateKind.SWAP: (2, 0, 0),
    GateKind.MCX: (1, None, 0), GateKind.MCZ: (1, None, 0),
    GateKind.SU4: (2, 0, 0),
}


@dataclass(frozen=True, eq=False)
class Gate:
    """One instruction.

    ``targets`` are ordered: ``targets[j]`` is bit ``j`` of the row/column
    index of the target matrix. ``controls`` condition the target matrix on
    all listed qubits being 1. ``matrix`` carries SU4/UNITARY payloads and
    ``clbits`` the classical destinations of a MEASURE.
    """

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = None
    clbits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "clbits", tuple(int(c) for c in self.clbits))
        if self.matrix is not None:
            m = np.array(self.matrix, dtype=np.complex128)
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @property
    def qubits(self) -> tuple[int, ...]:
        """Targets followed by controls."""
        return self.targets + self.controls

    @property
    def span(self) -> int:
        return len(set(self.qubits))

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.targets, self.controls, self.params, self.clbits) != (
            other.kind, other.targets, other.controls, other.params, other.clbits
        ):
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is None and other.matrix is None
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.kind, self.targets, self.controls, self.params))

    def __repr__(self):
        parts = [self.kind.name]
        if self.params:
            parts.append("(" + ", ".join(f"{p:.6g}" for p in self.params) + ")")
        ops = ",".join(map(str, self.targets))
        if self.controls:
            ops = ",".join(map(str, self.controls)) + "->" + ops
        return f"{''.join(parts)}[{ops}]"

    def remap(self, mapping: Sequence[int] | dict) -> "Gate":
        return Gate(
            self.kind,
            tuple(mapping[q] for q in self.targets),
            tuple(mapping[q] for q in self.controls),
            self.params,
            self.matrix,
            self.clbits,
        )


# constructors ---------------------------------------------------------------

def h(q): return Gate(GateKind.H, (q,))
def x(q): return Gate(GateKind.X, (q,))
def y(q): return Gate(GateKind.Y, (q,))
def z(q): return Gate(GateKind.Z, (q,))
def s(q): return Gate(GateKind.S, (q,))
def t(q): return Gate(GateKind.T, (q,))
def sx(q): return Gate(GateKind.SQRT_X, (q,))
def sy(q): return Gate(GateKind.SQRT_Y, (q,))
def rx(theta, q): return Gate(GateKind.RX, (q,), params=(theta,))
def ry(theta, q): return Gate(GateKind.RY, (q,), params=(theta,))
def rz(theta, q): return Gate(GateKind.RZ, (q,), params=(theta,))
def p(theta, q): return Gate(GateKind.P, (q,), params=(theta,))
def u(theta, phi, lam, q): return Gate(GateKind.U, (q,), params=(theta, phi, lam))
def cx(c, q): return Gate(GateKind.CX, (q,), (c,))
def cz(c, q): return Gate(GateKind.CZ, (q,), (c,))
def cp(theta, c, q): return Gate(GateKind.CP, (q,), (c,), (theta,))
def ccx(c1, c2, q): return Gate(GateKind.CCX, (q,), (c1, c2))
def swap(a, b): return Gate(GateKind.SWAP, (a, b))
def mcx(controls, q): return Gate(GateKind.MCX, (q,), tuple(controls))
def mcz(controls, q): return Gate(GateKind.MCZ, (q,), tuple(controls))
def su4(matrix, a, b): return Gate(GateKind.SU4, (a, b), matrix=matrix)
def unitary(matrix, qubits): return Gate(GateKind.UNITARY, tuple(qubits), matrix=matrix)
def measure(q, c): return Gate(GateKind.MEASURE, (q,), clbits=(c,))
def barrier(qubits): return Gate(GateKind.BARRIER, tuple(qubits))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    name: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def unitary_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.kind.is_unitary]

    def measurements(self) -> list[Gate]:
        return [g for g in self.gates if g.kind is GateKind.MEASURE]

    def replace(self, gates: Iterable[Gate], **meta) -> "Circuit":
        md = dict(self.metadata)
        md.update(meta)
        return Circuit(self.n_qubits, tuple(gates), self.name, md)


@dataclass
class CircuitStats:
    total_gates: int
    depth: int
    non_local_gates: int
    histogram: dict[str, int]

    @property
    def non_local_fraction(self) -> float:
        return self.non_local_gates / self.total_gates if self.total_gates else 0.0

    @property
    def non_local_percent(self) -> int:
        return round(100 * self.non_local_fraction)

    def as_dict(self) -> dict:
        return {
            "total_gates": self.total_gates,
            "depth": self.depth,
            "non_local_gates": self.non_local_gates,
            "non_local_fraction": self.non_local_fraction,
            "non_local_percent": self.non_local_percent,
            "histogram": dict(self.histogram),
        }


# matrices -------------------------------------------------------------------

_SQ2 = 1 / np.sqrt(2)
_FIXED = {
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    GateKind.SQRT_X: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    GateKind.SQRT_Y: 0.5 * np.array([[1 + 1j, -1 - 1j], [1 + 1j, 1 + 1j]]),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
_FIXED[GateKind.CX] = _FIXED[GateKind.MCX] = _FIXED[GateKind.CCX] = _FIXED[GateKind.X]
_FIXED[GateKind.CZ] = _FIXED[GateKind.MCZ] = _FIXED[GateKind.Z]
for _m in _FIXED.values():
    _m.setflags(write=False)


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """OpenQASM 2.0 ``u3(theta, phi, lambda)``."""
    c, s_ = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([
        [c, -np.exp(1j * lam) * s_],
        [np.exp(1j * phi) * s_, np.exp(1j * (phi + lam)) * c],
    ])


def gate_matrix(g: Gate) -> np.ndarray:
    """Matrix acting on ``g.targets`` (controls excluded)."""
    k = g.kind
    if not k.is_unitary:
        raise ValueError(f"{k.name} has no unitary matrix")
    if k in _FIXED:
        return _FIXED[k]
    if k in (GateKind.SU4, GateKind.UNITARY):
        if g.matrix is None:
            raise ValueError(f"{k.name} gate without matrix payload")
        return g.matrix
    theta = g.params[0]
    if k is GateKind.RX:
        c, s_ = np.cos(theta / 2), np.sin(theta / 2)
        return np.array([[c, -1j * s_], [-1j * s_, c]])
    if k is GateKind.RY:
        c, s_ = np.cos(theta / 2), np.sin(theta / 2)
        return np.array([[c, -s_], [s_, c]], dtype=complex)
    if k is GateKind.RZ:
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    if k in (GateKind.P, GateKind.CP):
        return np.diag([1, np.exp(1j * theta)])
    if k is GateKind.U:
        return u_matrix(*g.params)
    raise ValueError(f"no matrix for {k.name}")  # pragma: no cover


def controlled_matrix(base: np.ndarray, n_controls: int) -> np.ndarray:
    """Operator on ``targets + controls`` (controls in the high index bits)."""
    d = base.shape[0]
    full = np.eye(d << n_controls, dtype=complex)
    full[-d:, -d:] = base
    return full


def full_matrix(g: Gate) -> tuple[tuple[int, ...], np.ndarray]:
    """Operand list and the matrix over all of them, controls folded in."""
    return g.qubits, controlled_matrix(gate_matrix(g), len(g.controls))


def embed(matrix: np.ndarray, operands: Sequence[int], space: Sequence[int]) -> np.ndarray:
    """Lift ``matrix`` acting on ``operands`` to the ordered qubit list ``space``.

    Bit ``j`` of an index of the result corresponds to ``space[j]``.
    """
    pos = [list(space).index(q) for q in operands]
    dim = 1 << len(space)
    idx = np.arange(dim)
    sub = np.zeros(dim, dtype=np.int64)
    for j, bit in enumerate(pos):
        sub |= ((idx >> bit) & 1) << j
    op_mask = sum(1 << b for b in pos)
    rest = idx & ~op_mask
    out = np.asarray(matrix)[sub[:, None], sub[None, :]]
    return np.where(rest[:, None] == rest[None, :], out, 0)


def is_unitary(m: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < atol)


def compose_same_target(g1: Gate, g2: Gate) -> np.ndarray:
    """Matrix of ``g1`` followed by ``g2`` on the same targets."""
    if g1.controls or g2.controls:
        raise ValueError("compose_same_target requires uncontrolled gates")
    if set(g1.targets) != set(g2.targets) or len(g1.targets) != len(g2.targets):
        raise ValueError(f"target mismatch: {g1.targets} vs {g2.targets}")
    m2 = embed(gate_matrix(g2), g2.targets, g1.targets)
    return m2 @ gate_matrix(g1)


def tensor_expand(g1: Gate, g2: Gate) -> tuple[tuple[int, ...], np.ndarray]:
    """Single operator for two gates on disjoint qubit sets, over their sorted union."""
    a, b = set(g1.qubits), set(g2.qubits)
    if a & b:
        raise ValueError(f"overlapping qubit sets {sorted(a & b)}")
    space = tuple(sorted(a | b))
    q1, m1 = full_matrix(g1)
    q2, m2 = full_matrix(g2)
    return space, embed(m2, q2, space) @ embed(m1, q1, space)


# stats / validation ---------------------------------------------------------

def stats(c: Circuit) -> CircuitStats:
    level = [0] * c.n_qubits
    total = non_local = depth = 0
    hist: Counter = Counter()
    for g in c.gates:
        if g.kind is GateKind.MEASURE:
            continue
        qs = g.qubits
        if g.kind is GateKind.BARRIER:
            top = max((level[q] for q in qs), default=0)
            for q in qs:
                level[q] = top
            continue
        lv = 1 + max(level[q] for q in qs)
        for q in qs:
            level[q] = lv
        depth = max(depth, lv)
        total += 1
        hist[g.kind.name] += 1
        if g.span >= 2:
            non_local += 1
    return CircuitStats(total, depth, non_local, dict(hist))


def validate(c: Circuit) -> list[str]:
    """Every structural violation in ``c``; an empty list means the circuit is valid."""
    errors = []
    seen_measure = False
    for k, g in enumerate(c.gates):
        qs = g.qubits
        bad = [q for q in qs if not 0 <= q < c.n_qubits]
        if bad:
            errors.append(f"qubit index out of range {bad} at gate {k}")
        if len(set(qs)) != len(qs):
            errors.append(f"overlapping operands at gate {k}")
        if g.kind is GateKind.MEASURE:
            seen_measure = True
            continue
        if g.kind is GateKind.BARRIER:
            continue
        if seen_measure:
            errors.append(f"mid-circuit {g.kind.name} after measurement at gate {k}")
        arity = _ARITY.get(g.kind)
        if arity is not None:
            nt, nc, npar = arity
            if len(g.targets) != nt:
                errors.append(f"{g.kind.name} expects {nt} target(s) at gate {k}")
            if nc is None and not g.controls:
                errors.append(f"{g.kind.name} requires at least one control at gate {k}")
            elif nc is not None and len(g.controls) != nc:
                errors.append(f"{g.kind.name} expects {nc} control(s) at gate {k}")
            if len(g.params) != npar:
                errors.append(f"{g.kind.name} expects {npar} parameter(s) at gate {k}")
        if g.kind in (GateKind.SU4, GateKind.UNITARY):
            m = g.matrix
            dim = 1 << len(g.targets)
            if m is None or m.shape != (dim, dim):
                errors.append(f"{g.kind.name} payload must be {dim}x{dim} at gate {k}")
            elif not is_unitary(m):
                dev = float(np.max(np.abs(m.conj().T @ m - np.eye(dim))))
                errors.append(f"non-unitary payload (deviation {dev:.3g}) at gate {k}")
    return errors


def check(c: Circuit) -> Circuit:
    errors = validate(c)
    if errors:
        raise CircuitError(errors)
    return c
