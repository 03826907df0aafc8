"""Command-line entry point: ``svsim {gen,stats,transpile,run,bench,roofline}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors
(capacity, parse, infeasible blocking, unreadable files).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .bench import APPS, BenchSpec, gen
from .circuit import CircuitError, stats
from .core import CapacityError, Precision
from .engine import NormalizationError, RunConfig, run
from .perf import PerfLedger, load_machine, roofline_report, scaling_table, to_csv
from .qasm import EmitError, QasmError, emit, parse_file
from .transpiler import BlockingError, FusionConfig, block_pass, fuse_pass, su4_decompose, sweep_blocking

RUNTIME_ERRORS = (CapacityError, QasmError, EmitError, BlockingError, CircuitError,
                  NormalizationError, OSError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _range(text: str) -> range:
    try:
        lo, _, hi = text.partition(":")
        return range(int(lo), int(hi or lo) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])

    def cell(v):
        if isinstance(v, float):
            return "nan" if math.isnan(v) else f"{v:.6g}"
        return str(v)

    cells = [[cell(r.get(c, "")) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _fusion(args) -> FusionConfig:
    return FusionConfig(args.fusion == "on", args.fusion_threshold, args.fusion_max_qubits)


def _add_exec_flags(p, *, blocking=True):
    p.add_argument("--fusion", choices=("on", "off"), default="on")
    p.add_argument("--fusion-threshold", type=int, default=FusionConfig.fusion_threshold)
    p.add_argument("--fusion-max-qubits", type=int, default=FusionConfig.max_fused_qubits)
    if blocking:
        p.add_argument("--blocking-qubits", type=int, default=None)
    p.add_argument("--precision", choices=("single", "double"), default="double")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--no-timestamps", action="store_true",
                        help="zero all timings so reports are byte-reproducible")
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="svsim", description="State-vector quantum circuit simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="generate a benchmark circuit as QASM")
    p.add_argument("app", choices=APPS)
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--marked", type=int)
    p.add_argument("-o", "--output")

    p = sub.add_parser("stats", parents=[common], help="gate count, depth and non-local share")
    p.add_argument("file")

    p = sub.add_parser("transpile", parents=[common], help="apply fusion and cache blocking")
    p.add_argument("file")
    _add_exec_flags(p)
    p.add_argument("--sweep", type=_range, metavar="LO:HI",
                   help="report inserted swaps for each blocking size in the range")
    p.add_argument("-o", "--output", help="write the transpiled circuit as QASM")

    p = sub.add_parser("run", parents=[common], help="simulate a QASM file and sample")
    p.add_argument("file")
    _add_exec_flags(p)
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", help="write the JSON run report here")

    p = sub.add_parser("bench", parents=[common], help="scaling table over a qubit range")
    p.add_argument("app", choices=APPS)
    p.add_argument("--qubits", type=_range, required=True, metavar="LO:HI")
    p.add_argument("--depth", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--repeats", type=int, default=5)
    _add_exec_flags(p)
    p.add_argument("--variants", default="fusion-on,fusion-off",
                   help="comma list from fusion-on, fusion-off")
    p.add_argument("-o", "--output", help="CSV output path")

    p = sub.add_parser("roofline", parents=[common], help="roofline rows for a run report")
    p.add_argument("--machine", default="a100", help="machine model file or bundled name")
    p.add_argument("--report", required=True, help="JSON report written by 'run --report'")
    p.add_argument("-o", "--output", help="CSV output path")
    return parser


# subcommands ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    spec = BenchSpec(args.app, args.qubits, args.depth, args.iterations, args.seed, args.marked)
    c = gen(spec)
    if args.app == "qv":
        c = su4_decompose(c)
    meta = {k: v for k, v in c.metadata.items() if k != "spec"}
    meta.update({k: v for k, v in vars(spec).items() if v is not None})
    _write(emit(c.replace(c.gates, **meta)), args.output)
    return 0


def cmd_stats(args) -> int:
    st = stats(parse_file(args.file))
    if args.format == "json":
        print(json.dumps(st.as_dict(), indent=2, sort_keys=True))
    else:
        print(f"{st.total_gates} gates, depth {st.depth}, "
              f"{st.non_local_gates} non-local ({st.non_local_percent}%)")
    return 0


def cmd_transpile(args) -> int:
    c = parse_file(args.file)
    precision = Precision.parse(args.precision)
    if args.sweep is not None:
        rows = sweep_blocking(fuse_pass(c, _fusion(args)), args.sweep, precision)
        if args.format == "json":
            print(json.dumps(rows, indent=2))
        else:
            sys.stdout.write(_table(rows))
        return 0
    out = fuse_pass(c, _fusion(args))
    summary = {"input_gates": len(c.gates), "fused_gates": len(out.gates)}
    if args.blocking_qubits is not None:
        plan = block_pass(out, args.blocking_qubits)
        out = plan.circuit
        summary.update(blocking_qubits=plan.blocking_qubits, inserted_swaps=plan.inserted_swaps,
                       exchange_swaps=plan.exchange_swaps,
                       predicted_inter_chunk_bytes=plan.predicted_inter_chunk_bytes(precision))
    summary["output_gates"] = len(out.gates)
    if args.output:
        _write(emit(out), args.output)
    if args.format == "json":
        print(json.dumps(summary, indent=2))
    else:
        sys.stdout.write(_table([summary]))
    return 0


def cmd_run(args) -> int:
    c = parse_file(args.file)
    cfg = RunConfig(args.precision, args.shots, args.seed, _fusion(args),
                    args.blocking_qubits, args.workers, keep_state=False)
    res = run(c, cfg)
    report = res.report(timestamps=not args.no_timestamps)
    if args.report:
        _write(json.dumps(report, indent=2, sort_keys=True) + "\n", args.report)
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        width = max((len(k) for k in res.counts), default=0)
        for key, count in res.counts.items():
            print(f"{key.rjust(width)}  {count}")
    return 0


_VARIANTS = {"fusion-on": True, "fusion-off": False}


def cmd_bench(args) -> int:
    names = [v.strip() for v in args.variants.split(",") if v.strip()]
    unknown = [v for v in names if v not in _VARIANTS]
    if unknown:
        raise UsageError(f"svsim bench: error: unknown variant(s): {', '.join(unknown)}")
    base = _fusion(args)
    variants = {
        name: RunConfig(args.precision, 0, args.seed,
                        FusionConfig(_VARIANTS[name], base.fusion_threshold, base.max_fused_qubits),
                        args.blocking_qubits, keep_state=False)
        for name in names
    }
    bench_args = {k: getattr(args, k) for k in ("depth", "iterations") if getattr(args, k)}
    if args.app in ("qv", "rqc"):
        bench_args["seed"] = args.seed
    rows = scaling_table(args.app, args.qubits, variants, args.repeats, **bench_args)
    if args.no_timestamps:
        for r in rows:
            r["mean_s"] = r["std_s"] = 0.0
    if args.output:
        _write(to_csv(rows), args.output)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    elif not args.output:
        sys.stdout.write(_table(rows))
    return 0


def cmd_roofline(args) -> int:
    with open(args.report) as fh:
        data = json.load(fh)
    led = PerfLedger.from_dict(data.get("ledger", data))
    rows = roofline_report(led, load_machine(args.machine))
    if args.output:
        _write(to_csv(rows), args.output)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        sys.stdout.write(_table(rows))
    return 0


COMMANDS = {"gen": cmd_gen, "stats": cmd_stats, "transpile": cmd_transpile,
            "run": cmd_run, "bench": cmd_bench, "roofline": cmd_roofline}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else 0
    except RUNTIME_ERRORS as exc:
        print(f"svsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
