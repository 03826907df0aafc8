"""Performance passes: gate fusion and cache blocking, plus SU(4) lowering for export."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .circuit import Circuit, Gate, GateKind, embed, full_matrix
from .core import Precision

DEFAULT_BLOCKING_QUBITS = 28


class BlockingError(ValueError):
    pass


@dataclass(frozen=True)
class FusionConfig:
    enabled: bool = True
    fusion_threshold: int = 14
    max_fused_qubits: int = 3

    def __post_init__(self):
        if self.max_fused_qubits < 1:
            raise ValueError("max_fused_qubits must be >= 1")


@dataclass(frozen=True)
class FusedUnitary:
    qubits: tuple[int, ...]
    matrix: np.ndarray
    provenance: tuple[int, ...]

    def as_gate(self) -> Gate:
        return Gate(GateKind.UNITARY, self.qubits, matrix=self.matrix)


def fuse_group(gates, indices=()) -> FusedUnitary:
    """Multiply a run of gates into one unitary over their sorted qubit union."""
    space = tuple(sorted({q for g in gates for q in g.qubits}))
    m = np.eye(1 << len(space), dtype=complex)
    for g in gates:
        qs, gm = full_matrix(g)
        m = embed(gm, qs, space) @ m
    return FusedUnitary(space, m, tuple(indices))


def fuse_pass(c: Circuit, cfg: FusionConfig = FusionConfig()) -> Circuit:
    """Greedy contiguous fusion.

    A gate joins the open group while the group's qubit union stays within
    ``max_fused_qubits``; MEASURE/BARRIER and gates wider than the limit flush
    the group and pass through. Groups of one gate are emitted unchanged.
    The output metadata maps each output position to its source positions.
    """
    if not cfg.enabled or c.n_qubits < cfg.fusion_threshold:
        return c
    out: list[Gate] = []
    provenance: list[tuple[int, ...]] = []
    group: list[int] = []
    qubits: set[int] = set()

    def flush():
        if len(group) == 1:
            out.append(c.gates[group[0]])
            provenance.append((group[0],))
        elif group:
            fused = fuse_group([c.gates[i] for i in group], group)
            out.append(fused.as_gate())
            provenance.append(fused.provenance)
        group.clear()
        qubits.clear()

    for i, g in enumerate(c.gates):
        qs = set(g.qubits)
        if not g.kind.is_unitary or len(qs) > cfg.max_fused_qubits:
            flush()
            out.append(g)
            provenance.append((i,))
            continue
        if len(qubits | qs) > cfg.max_fused_qubits:
            flush()
        group.append(i)
        qubits |= qs
    flush()
    return c.replace(out, fusion_provenance=provenance)


@dataclass(frozen=True)
class BlockingPlan:
    """A circuit rewritten onto physical qubits so every gate acts below ``blocking_qubits``.

    ``inserted`` holds positions of the SWAPs added by the pass (including
    the trailing ``restore`` block that returns the layout to identity).
    """

    circuit: Circuit
    blocking_qubits: int
    inserted: frozenset
    restore: tuple[Gate, ...]
    final_layout: tuple[int, ...]

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def inserted_swaps(self) -> int:
        return len(self.inserted)

    def is_exchange(self, index: int) -> bool:
        """True if the gate at ``index`` is an inserted swap moving data between chunks."""
        return index in self.inserted and max(self.circuit.gates[index].targets) >= self.blocking_qubits

    @property
    def exchange_swaps(self) -> int:
        return sum(1 for i in self.inserted if self.is_exchange(i))

    def predicted_inter_chunk_bytes(self, precision=Precision.DOUBLE) -> int:
        amp = Precision.parse(precision).amplitude_bytes
        return self.exchange_swaps * (1 << (self.n_qubits - 1)) * amp


def block_pass(c: Circuit, b: int) -> BlockingPlan:
    n = c.n_qubits
    if not 1 <= b <= n:
        raise BlockingError(f"blocking_qubits must be in [1, {n}], got {b}")
    l2p = list(range(n))
    p2l = list(range(n))
    out: list[Gate] = []
    inserted = set()
    trailing: list[Gate] = []

    def swap_phys(lo, hi):
        inserted.add(len(out))
        out.append(Gate(GateKind.SWAP, (lo, hi)))
        ql, qh = p2l[lo], p2l[hi]
        p2l[lo], p2l[hi] = qh, ql
        l2p[qh], l2p[ql] = lo, hi

    for k, g in enumerate(c.gates):
        if g.kind is GateKind.MEASURE:
            trailing.append(g)
            continue
        if trailing:
            # only barriers may follow measurements
            trailing.append(g)
            continue
        ops = g.qubits
        if g.kind.is_unitary and len(set(ops)) > b:
            raise BlockingError(
                f"blocking infeasible: gate {k} ({g.kind.name}) touches {len(set(ops))} qubits > b={b}"
            )
        if g.kind.is_unitary:
            occupied = {l2p[q] for q in ops if l2p[q] < b}
            for q in ops:
                if l2p[q] >= b:
                    lo = min(p for p in range(b) if p not in occupied)
                    swap_phys(lo, l2p[q])
                    occupied.add(lo)
        out.append(g.remap(l2p))

    restore_start = len(out)
    for pos in range(n):
        if p2l[pos] != pos:
            swap_phys(pos, l2p[pos])
    restore = tuple(out[restore_start:])
    out.extend(trailing)
    rewritten = c.replace(out, blocking_qubits=b)
    return BlockingPlan(rewritten, b, frozenset(inserted), restore, tuple(l2p))


def sweep_blocking(c: Circuit, b_values, precision=Precision.DOUBLE) -> list[dict]:
    """Inserted swaps and predicted inter-chunk traffic per blocking size, without simulating."""
    rows = []
    for b in b_values:
        plan = block_pass(c, b)
        rows.append({
            "blocking_qubits": b,
            "inserted_swaps": plan.inserted_swaps,
            "exchange_swaps": plan.exchange_swaps,
            "predicted_inter_chunk_bytes": plan.predicted_inter_chunk_bytes(precision),
        })
    return rows


# SU(4) lowering --------------------------------------------------------------

def zyz_angles(m: np.ndarray) -> tuple[float, float, float, float]:
    """``(theta, phi, lam, phase)`` with ``m == exp(1j*phase) * u3(theta, phi, lam)``."""
    m = np.asarray(m, dtype=complex)
    det = np.linalg.det(m)
    phase0 = np.angle(det) / 2
    v = m * np.exp(-1j * phase0)
    a, b = v[0, 0], v[1, 0]
    theta = 2 * np.arctan2(abs(b), abs(a))
    s_plus = -2 * np.angle(a) if abs(a) > 1e-14 else 0.0
    d_minus = 2 * np.angle(b) if abs(b) > 1e-14 else 0.0
    phi = (s_plus + d_minus) / 2
    lam = (s_plus - d_minus) / 2
    return float(theta), float(phi), float(lam), float(phase0 - (phi + lam) / 2)


def _u3(m, q) -> Gate:
    theta, phi, lam, _ = zyz_angles(m)
    return Gate(GateKind.U, (q,), params=(theta, phi, lam))


def _ry(angle, q) -> Gate:
    return Gate(GateKind.U, (q,), params=(angle, 0.0, 0.0))


def _rz(angle, q) -> Gate:
    # phase gate: Rz up to a global phase
    return Gate(GateKind.U, (q,), params=(0.0, 0.0, angle))


def _cx(c, t) -> Gate:
    return Gate(GateKind.CX, (t,), (c,))


def _demux_u2(a0, a1, low, high) -> list[Gate]:
    """Gates applying ``a0`` to ``low`` when ``high`` is 0 and ``a1`` when it is 1."""
    t, v = scipy.linalg.schur(a0 @ a1.conj().T, output="complex")
    d = np.diag(t)
    delta = np.sqrt(d)
    w = np.diag(delta) @ v.conj().T @ a1
    alpha, beta = np.angle(delta)
    return [
        _u3(w, low),
        _cx(high, low),
        _rz(beta - alpha, low),
        _cx(high, low),
        _rz(-(alpha + beta), high),
        _u3(v, low),
    ]


def su4_gates(matrix: np.ndarray, low: int, high: int) -> list[Gate]:
    """Lower a 4x4 unitary on ``(low, high)`` to u3/cx gates, exact up to global phase.

    Uses the cosine-sine decomposition ``U = L . CS . R`` split on ``high``:
    ``L`` and ``R`` are ``high``-multiplexed single-qubit gates on ``low``, and
    ``CS`` is a ``low``-multiplexed Ry on ``high``. Six CX in total.
    """
    m = np.asarray(matrix, dtype=complex)
    (l0, l1), theta, (r0, r1) = scipy.linalg.cossin(m, p=2, q=2, separate=True)
    # CS block for low == i is [[cos t_i, -sin t_i], [sin t_i, cos t_i]] == Ry(2 t_i)
    a0, a1 = 2 * theta
    gates = _demux_u2(r0, r1, low, high)
    gates += [
        _cx(low, high),
        _ry((a0 - a1) / 2, high),
        _cx(low, high),
        _ry((a0 + a1) / 2, high),
    ]
    gates += _demux_u2(l0, l1, low, high)
    return gates


def su4_decompose(c: Circuit) -> Circuit:
    """Replace every SU4 gate with an equivalent u3/cx sequence (global phase aside)."""
    out = []
    for g in c.gates:
        if g.kind is GateKind.SU4:
            out.extend(su4_gates(g.matrix, g.targets[0], g.targets[1]))
        else:
            out.append(g)
    return c.replace(out, su4_decomposed=True)
