"""Circuit execution: gate application, monolithic and chunked runs, sampling."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .circuit import Circuit, CircuitStats, Gate, GateKind, check, gate_matrix, stats
from .core import (
    CapacityError,
    Precision,
    StateVector,
    check_capacity,
    init_zero_state,
)
from .perf import PerfLedger, kernel_cost
from .transpiler import BlockingPlan, FusionConfig, block_pass, fuse_pass

PHASES = ("initialize", "transfer", "compute", "finalize")


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    precision: Precision = Precision.DOUBLE
    shots: int = 0
    seed: int = 0
    fusion: FusionConfig = FusionConfig()
    blocking_qubits: int | None = None
    workers: int = 1
    keep_state: bool = True
    budget: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "precision", Precision.parse(self.precision))
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def as_dict(self) -> dict:
        return {
            "precision": self.precision.value,
            "shots": self.shots,
            "seed": self.seed,
            "fusion": {
                "enabled": self.fusion.enabled,
                "threshold": self.fusion.fusion_threshold,
                "max_qubits": self.fusion.max_fused_qubits,
            },
            "blocking_qubits": self.blocking_qubits,
            "workers": self.workers,
        }


@dataclass
class RunResult:
    state: StateVector | None
    counts: dict[str, int]
    ledger: PerfLedger
    stats: CircuitStats
    config: RunConfig
    executed_gates: int = 0
    backend: str = field(default_factory=lambda: kernels.BACKEND)

    @property
    def phase_times(self) -> dict[str, float]:
        return dict(self.ledger.phases)

    def report(self, timestamps: bool = True) -> dict:
        led = self.ledger.as_dict()
        if not timestamps:
            led["phases"] = {k: 0.0 for k in led["phases"]}
            led["wall"] = 0.0
            for cls in led["kernel_classes"].values():
                cls["seconds"] = 0.0
        return {
            "stats": self.stats.as_dict(),
            "config": self.config.as_dict(),
            "backend": self.backend,
            "executed_gates": self.executed_gates,
            "phase_times": led["phases"],
            "wall": led["wall"],
            "flops": led["flops"],
            "bytes": led["bytes"],
            "inter_chunk_bytes": led["inter_chunk_bytes"],
            "cross_worker_bytes": led["cross_worker_bytes"],
            "kernel_classes": led["kernel_classes"],
            "ledger": led,
            "counts": self.counts,
        }


# gate application -------------------------------------------------------------

def _check_operands(n: int, qubits) -> None:
    qubits = list(qubits)
    if any(not 0 <= q < n for q in qubits):
        raise IndexError(f"qubit operand out of range for {n} qubits: {qubits}")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"overlapping operands {qubits}")


def apply_1q(s: StateVector, m: np.ndarray, target: int) -> None:
    _check_operands(s.n_qubits, [target])
    kernels.apply_1q(s.amplitudes, np.asarray(m, dtype=complex), target)


def apply_controlled(s: StateVector, m: np.ndarray, controls, target: int) -> None:
    _check_operands(s.n_qubits, [target, *controls])
    kernels.apply_1q(s.amplitudes, np.asarray(m, dtype=complex), target, tuple(controls))


def apply_kq(s: StateVector, m: np.ndarray, qubits) -> None:
    """Generic ``2**k`` kernel; ``qubits[j]`` is bit ``j`` of the matrix index."""
    qubits = tuple(qubits)
    _check_operands(s.n_qubits, qubits)
    m = np.asarray(m, dtype=complex)
    if m.shape != (1 << len(qubits),) * 2:
        raise ValueError(f"matrix shape {m.shape} does not match {len(qubits)} qubits")
    kernels.apply_generic(s.amplitudes, m, qubits)


def apply_gate(amps: np.ndarray, g: Gate) -> None:
    """Apply a unitary gate in place, picking the kernel by operand count."""
    m = gate_matrix(g)
    k, c = len(g.targets), len(g.controls)
    if k == 1:
        kernels.apply_1q(amps, m, g.targets[0], g.controls)
    elif c:
        kernels.apply_generic(amps, m, g.targets, g.controls)
    elif k == 2:
        kernels.apply_2q(amps, m, g.targets)
    elif k == 3:
        kernels.apply_3q(amps, m, g.targets)
    else:
        kernels.apply_generic(amps, m, g.targets)


# sampling -------------------------------------------------------------------------

@dataclass
class ChunkedState:
    """State split into ``2**(n - b)`` chunks of ``2**b`` amplitudes, owned round-robin."""

    n_qubits: int
    blocking_qubits: int
    precision: Precision
    chunks: list[np.ndarray]
    workers: int = 1

    @classmethod
    def zero(cls, n: int, b: int, precision=Precision.DOUBLE, workers: int = 1, budget=None):
        precision = Precision.parse(precision)
        check_capacity(n, precision, budget)
        chunks = [np.zeros(1 << b, dtype=precision.dtype) for _ in range(1 << (n - b))]
        chunks[0][0] = 1
        return cls(n, b, precision, chunks, workers)

    def owner(self, chunk: int) -> int:
        return chunk % self.workers

    def chunks_of(self, worker: int) -> list[int]:
        return list(range(worker, len(self.chunks), self.workers))

    def to_state(self) -> StateVector:
        return StateVector(self.n_qubits, self.precision, np.concatenate(self.chunks))


def _key_formatter(n: int, measures):
    if not measures:
        return lambda idx: format(idx, f"0{n}b")
    pairs = [(g.targets[0], g.clbits[0] if g.clbits else g.targets[0]) for g in measures]
    width = max(c for _, c in pairs) + 1

    def fmt(idx):
        bits = ["0"] * width
        for q, c in pairs:
            bits[width - 1 - c] = "1" if (idx >> q) & 1 else "0"
        return "".join(bits)

    return fmt


def _norm_tol(precision: Precision) -> float:
    return max(1e-6, precision.norm_tolerance)


def sample(s: StateVector | ChunkedState, shots: int, seed: int = 0, measures=None) -> dict[str, int]:
    """Draw ``shots`` basis outcomes by inverse-CDF search on a seeded PCG64 stream.

    Keys are bitstrings with qubit 0 (or classical bit 0) rightmost.
    """
    if shots < 0:
        raise ValueError("shots must be >= 0")
    if isinstance(s, ChunkedState):
        chunk_probs = [c.real.astype(np.float64) ** 2 + c.imag.astype(np.float64) ** 2 for c in s.chunks]
        chunk_tot = np.array([p.sum() for p in chunk_probs])
        total = float(chunk_tot.sum())
        n, precision = s.n_qubits, s.precision
    else:
        probs = s.probabilities()
        total = float(probs.sum())
        n, precision = s.n_qubits, s.precision
    if abs(total - 1.0) > _norm_tol(precision):
        raise NormalizationError(f"state norm {total!r} deviates from 1")
    if shots == 0:
        return {}
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(shots) * total
    if isinstance(s, ChunkedState):
        chunk_cdf = np.cumsum(chunk_tot)
        which = np.minimum(np.searchsorted(chunk_cdf, u, side="right"), len(s.chunks) - 1)
        idx = np.empty(shots, dtype=np.int64)
        starts = chunk_cdf - chunk_tot
        for ch in np.unique(which):
            sel = which == ch
            local = np.cumsum(chunk_probs[ch])
            pos = np.searchsorted(local, u[sel] - starts[ch], side="right")
            idx[sel] = (int(ch) << s.blocking_qubits) + np.minimum(pos, local.size - 1)
    else:
        cdf = np.cumsum(probs)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    fmt = _key_formatter(n, measures)
    values, freq = np.unique(idx, return_counts=True)
    counts: dict[str, int] = {}
    for v, f in zip(values.tolist(), freq.tolist()):
        key = fmt(v)
        counts[key] = counts.get(key, 0) + f
    return dict(sorted(counts.items()))


# execution ------------------------------------------------------------------------

def _prepare(c: Circuit, cfg: RunConfig) -> tuple[CircuitStats, Circuit]:
    check(c)
    return stats(c), fuse_pass(c, cfg.fusion)


def run(c: Circuit, cfg: RunConfig = RunConfig()) -> RunResult:
    """Simulate ``c`` from ``|0...0>`` and sample ``cfg.shots`` outcomes from the final state."""
    st, transpiled = _prepare(c, cfg)
    if cfg.blocking_qubits is not None:
        return run_chunked(block_pass(transpiled, cfg.blocking_qubits), cfg, source_stats=st)
    led = PerfLedger(precision=cfg.precision)
    start = time.perf_counter()
    state = init_zero_state(c.n_qubits, cfg.precision, cfg.budget)
    t1 = time.perf_counter()
    led.phases["initialize"] += t1 - start
    amps = state.amplitudes
    n = c.n_qubits
    executed = 0
    for g in transpiled.gates:
        if not g.kind.is_unitary:
            continue
        t = time.perf_counter()
        apply_gate(amps, g)
        dt = time.perf_counter() - t
        led.record(kernel_cost(len(g.targets), len(g.controls), n, cfg.precision), dt)
        executed += 1
    t2 = time.perf_counter()
    led.phases["compute"] += t2 - t1
    counts = sample(state, cfg.shots, cfg.seed, transpiled.measurements())
    end = time.perf_counter()
    led.phases["finalize"] += end - t2
    led.wall = end - start
    return RunResult(state if cfg.keep_state else None, counts, led, st, cfg, executed)


def _exchange(cs: ChunkedState, lo: int, hi: int) -> tuple[int, int]:
    """Physically exchange amplitudes for SWAP(lo, hi) with ``hi >= b``.

    Returns ``(bytes_moved, cross_worker_bytes)``.
    """
    b = cs.blocking_qubits
    amp = cs.precision.amplitude_bytes
    moved = cross = 0
    hbit = 1 << (hi - b)
    if lo < b:
        per_pair = (1 << b) * amp
        for c0 in range(len(cs.chunks)):
            if c0 & hbit:
                continue
            c1 = c0 | hbit
            kernels.exchange(cs.chunks[c0], cs.chunks[c1], lo)
            moved += per_pair
            if cs.owner(c0) != cs.owner(c1):
                cross += per_pair
    else:
        lbit = 1 << (lo - b)
        per_pair = 2 * (1 << b) * amp
        for c0 in range(len(cs.chunks)):
            if not (c0 & lbit) or (c0 & hbit):
                continue
            c1 = (c0 & ~lbit) | hbit
            tmp = cs.chunks[c0].copy()
            cs.chunks[c0][:] = cs.chunks[c1]
            cs.chunks[c1][:] = tmp
            moved += per_pair
            if cs.owner(c0) != cs.owner(c1):
                cross += per_pair
    return moved, cross


def run_chunked(plan: BlockingPlan, cfg: RunConfig = RunConfig(), source_stats: CircuitStats | None = None) -> RunResult:
    """Execute a blocking plan on a chunked state with ``cfg.workers`` workers.

    Gates run chunk-locally (worker threads own disjoint chunk sets);
    inserted swaps reaching above the blocking boundary move amplitudes
    between chunks and are charged to the transfer phase and the ledger.
    """
    c = plan.circuit
    n, b = c.n_qubits, plan.blocking_qubits
    led = PerfLedger(precision=cfg.precision)
    start = time.perf_counter()
    cs = ChunkedState.zero(n, b, cfg.precision, cfg.workers, cfg.budget)
    t_init = time.perf_counter()
    led.phases["initialize"] += t_init - start
    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    worker_chunks = [cs.chunks_of(w) for w in range(cfg.workers)]

    def local(g, ids):
        for i in ids:
            apply_gate(cs.chunks[i], g)

    executed = 0
    try:
        for pos, g in enumerate(c.gates):
            if not g.kind.is_unitary:
                continue
            t = time.perf_counter()
            if plan.is_exchange(pos):
                lo, hi = sorted(g.targets)
                moved, cross = _exchange(cs, lo, hi)
                led.record_exchange(moved, cross)
                led.phases["transfer"] += time.perf_counter() - t
                continue
            if max(g.qubits) >= b:
                raise RuntimeError(f"gate {pos} reaches qubit {max(g.qubits)} >= b={b}")
            if pool is None:
                local(g, worker_chunks[0])
            else:
                list(pool.map(lambda ids: local(g, ids), worker_chunks))
            dt = time.perf_counter() - t
            led.record(kernel_cost(len(g.targets), len(g.controls), n, cfg.precision), dt)
            led.phases["compute"] += dt
            executed += 1
    finally:
        if pool is not None:
            pool.shutdown()
    t_fin = time.perf_counter()
    counts = sample(cs, cfg.shots, cfg.seed, c.measurements())
    state = cs.to_state() if cfg.keep_state else None
    end = time.perf_counter()
    led.phases["finalize"] += end - t_fin
    led.wall = end - start
    st = source_stats if source_stats is not None else stats(c)
    return RunResult(state, counts, led, st, cfg, executed)


def phase_breakdown(r: RunResult) -> dict[str, float]:
    """Fractions of wall time per phase plus unaccounted ``idle``; they sum to 1."""
    phases = {k: max(0.0, r.ledger.phases.get(k, 0.0)) for k in PHASES}
    accounted = sum(phases.values())
    wall = max(r.ledger.wall, accounted)
    if wall <= 0:
        return {**{k: 0.0 for k in PHASES}, "idle": 1.0}
    out = {k: v / wall for k, v in phases.items()}
    out["idle"] = 1.0 - sum(out.values())
    return out


__all__ = [
    "CapacityError", "ChunkedState", "NormalizationError", "RunConfig", "RunResult",
    "apply_1q", "apply_controlled", "apply_gate", "apply_kq", "phase_breakdown",
    "run", "run_chunked", "sample",
]
