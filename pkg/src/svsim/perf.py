"""FLOP/byte cost model, roofline evaluation and performance reports.

A complex multiply is costed at 6 real operations and a complex add at 2, so
a one-qubit update costs 14 operations per amplitude against 16 bytes of
single-precision traffic (one read and one write of the 8-byte amplitude).
"""
from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .core import CapacityError, Precision

KERNEL_CLASSES = ("1q", "controlled", "2q", "3q", "generic")


@dataclass(frozen=True)
class MachineModel:
    name: str
    peak_bandwidth: float  # bytes/s
    peak_flops_sp: float
    peak_flops_dp: float

    def __post_init__(self):
        if min(self.peak_bandwidth, self.peak_flops_sp, self.peak_flops_dp) <= 0:
            raise ValueError("machine model peaks must be positive")

    def peak_flops(self, precision) -> float:
        p = Precision.parse(precision)
        return self.peak_flops_sp if p is Precision.SINGLE else self.peak_flops_dp

    def ridge_point(self, precision=Precision.SINGLE) -> float:
        return self.peak_flops(precision) / self.peak_bandwidth


def parse_machine(text: str) -> MachineModel:
    """Parse ``key = value`` lines (``#`` comments allowed)."""
    fields = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        fields[key] = value
    try:
        return MachineModel(
            name=fields.get("name", "unnamed"),
            peak_bandwidth=float(fields["peak_bw_gib_s"]) * 2**30,
            peak_flops_sp=float(fields["peak_sp_tflops"]) * 1e12,
            peak_flops_dp=float(fields.get("peak_dp_tflops", fields["peak_sp_tflops"])) * 1e12,
        )
    except KeyError as exc:
        raise ValueError(f"machine model missing key {exc.args[0]!r}") from None


def load_machine(source: str | Path = "a100") -> MachineModel:
    """Load a machine model from a file path or a bundled name such as ``a100``."""
    path = Path(source)
    if path.is_file():
        return parse_machine(path.read_text())
    name = path.name if path.suffix == ".model" else f"{path.name}.model"
    bundled = resources.files("svsim.data") / name
    if not bundled.is_file():
        raise FileNotFoundError(f"no machine model file or bundled model named {source!r}")
    return parse_machine(bundled.read_text())


A100 = load_machine("a100")


@dataclass(frozen=True)
class KernelCost:
    kernel_class: str
    flops: int
    bytes: int

    @property
    def arithmetic_intensity(self) -> float:
        return self.flops / self.bytes


def kernel_class(k: int, c: int = 0) -> str:
    if c > 0:
        return "controlled"
    return {1: "1q", 2: "2q", 3: "3q"}.get(k, "generic")


def kernel_cost(k: int, c: int, n: int, precision=Precision.SINGLE) -> KernelCost:
    """Cost of applying a ``2**k`` matrix with ``c`` controls on an ``n``-qubit state."""
    if k < 1 or c < 0 or k + c > n:
        raise ValueError(f"invalid kernel shape k={k}, c={c} for {n} qubits")
    dim = 1 << k
    groups = 1 << (n - k - c)
    flops = groups * (6 * dim * dim + 2 * dim * (dim - 1))
    nbytes = (1 << (n - c)) * Precision.parse(precision).amplitude_bytes * 2
    return KernelCost(kernel_class(k, c), flops, nbytes)


def roofline_attainable(m: MachineModel, intensity: float, precision=Precision.SINGLE) -> float:
    return min(m.peak_flops(precision), intensity * m.peak_bandwidth)


def classify_bound(m: MachineModel, cost: KernelCost | float, precision=Precision.SINGLE) -> str:
    ai = cost.arithmetic_intensity if isinstance(cost, KernelCost) else float(cost)
    return "memory-bound" if ai < m.ridge_point(precision) else "compute-bound"


@dataclass
class ClassTotals:
    count: int = 0
    flops: int = 0
    bytes: int = 0
    seconds: float = 0.0

    def add(self, other: "ClassTotals"):
        self.count += other.count
        self.flops += other.flops
        self.bytes += other.bytes
        self.seconds += other.seconds


@dataclass
class PerfLedger:
    precision: Precision = Precision.DOUBLE
    classes: dict[str, ClassTotals] = field(default_factory=dict)
    inter_chunk_bytes: int = 0
    cross_worker_bytes: int = 0
    exchanges: int = 0
    phases: dict[str, float] = field(
        default_factory=lambda: dict.fromkeys(("initialize", "transfer", "compute", "finalize"), 0.0)
    )
    wall: float = 0.0

    @property
    def flops(self) -> int:
        return sum(t.flops for t in self.classes.values())

    @property
    def bytes(self) -> int:
        return sum(t.bytes for t in self.classes.values())

    def record(self, cost: KernelCost, seconds: float = 0.0):
        t = self.classes.setdefault(cost.kernel_class, ClassTotals())
        t.count += 1
        t.flops += cost.flops
        t.bytes += cost.bytes
        t.seconds += seconds

    def record_exchange(self, nbytes: int, cross_worker_bytes: int = 0):
        self.exchanges += 1
        self.inter_chunk_bytes += nbytes
        self.cross_worker_bytes += cross_worker_bytes

    def merge(self, other: "PerfLedger"):
        for name, t in other.classes.items():
            self.classes.setdefault(name, ClassTotals()).add(t)
        self.inter_chunk_bytes += other.inter_chunk_bytes
        self.cross_worker_bytes += other.cross_worker_bytes
        self.exchanges += other.exchanges
        for k, v in other.phases.items():
            self.phases[k] = self.phases.get(k, 0.0) + v
        self.wall += other.wall

    def as_dict(self) -> dict:
        return {
            "precision": self.precision.value,
            "flops": self.flops,
            "bytes": self.bytes,
            "inter_chunk_bytes": self.inter_chunk_bytes,
            "cross_worker_bytes": self.cross_worker_bytes,
            "exchanges": self.exchanges,
            "kernel_classes": {
                name: {"count": t.count, "flops": t.flops, "bytes": t.bytes, "seconds": t.seconds}
                for name, t in sorted(self.classes.items())
            },
            "phases": dict(self.phases),
            "wall": self.wall,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PerfLedger":
        led = cls(precision=Precision.parse(d.get("precision", "double")))
        for name, t in d.get("kernel_classes", {}).items():
            led.classes[name] = ClassTotals(t["count"], t["flops"], t["bytes"], t["seconds"])
        led.inter_chunk_bytes = d.get("inter_chunk_bytes", 0)
        led.cross_worker_bytes = d.get("cross_worker_bytes", 0)
        led.exchanges = d.get("exchanges", 0)
        led.phases.update(d.get("phases", {}))
        led.wall = d.get("wall", 0.0)
        return led


def circuit_cost(circuit, precision=Precision.SINGLE) -> PerfLedger:
    """Ledger of modeled costs for every unitary gate, without executing anything."""
    led = PerfLedger(precision=Precision.parse(precision))
    for g in circuit.gates:
        if g.kind.is_unitary:
            led.record(kernel_cost(len(g.targets), len(g.controls), circuit.n_qubits, precision))
    return led


def roofline_report(ledger: PerfLedger, machine: MachineModel = A100) -> list[dict]:
    """One row per kernel class; ``achieved`` is measured here, ``attainable`` is modeled."""
    rows = []
    for name in sorted(ledger.classes, key=lambda c: KERNEL_CLASSES.index(c)):
        t = ledger.classes[name]
        ai = t.flops / t.bytes
        reliable = t.seconds > 0
        rows.append({
            "kernel_class": name,
            "count": t.count,
            "flops": t.flops,
            "bytes": t.bytes,
            "intensity": ai,
            "seconds": t.seconds,
            "achieved": t.flops / t.seconds if reliable else math.nan,
            "attainable": roofline_attainable(machine, ai, ledger.precision),
            "bound": classify_bound(machine, ai, ledger.precision),
            "machine": machine.name,
            "reliable": reliable,
        })
    return rows


def scaling_table(app: str, qubit_range, variants: dict, repeats: int = 5, **bench_args) -> list[dict]:
    """Run ``app`` over ``qubit_range`` for each named :class:`RunConfig` variant.

    Rows carry the mean and standard deviation of wall time over ``repeats``
    and the (repeat-invariant) ledger FLOP and byte totals.
    """
    from .bench import BenchSpec, gen
    from .engine import run

    rows = []
    for n in qubit_range:
        circuit = gen(BenchSpec(app, n, **bench_args))
        for vname, cfg in variants.items():
            row = {"app": app, "qubits": n, "variant": vname, "repeats": repeats}
            times, totals = [], set()
            try:
                for _ in range(repeats):
                    res = run(circuit, cfg)
                    times.append(res.ledger.wall)
                    totals.add((res.ledger.flops, res.ledger.bytes))
            except CapacityError as exc:
                row.update(status=f"skipped: {exc}", mean_s=math.nan, std_s=math.nan,
                           flops=0, bytes=0)
                rows.append(row)
                continue
            if len(totals) != 1:
                raise RuntimeError(f"non-deterministic ledger totals for {app}({n}) {vname}")
            flops, nbytes = totals.pop()
            row.update(
                status="ok",
                mean_s=statistics.fmean(times),
                std_s=statistics.stdev(times) if len(times) > 1 else 0.0,
                flops=flops,
                bytes=nbytes,
            )
            rows.append(row)
    return rows


def to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
