import csv
import io
import math

import pytest
from hypothesis import given, strategies as st

from svsim.bench import gen_ghz, gen_qv
from svsim.core import Precision
from svsim.engine import RunConfig, run
from svsim.perf import (
    A100, KernelCost, PerfLedger, circuit_cost, classify_bound, kernel_class, kernel_cost,
    load_machine, parse_machine, roofline_attainable, roofline_report, scaling_table, to_csv,
)
from svsim.transpiler import FusionConfig

OFF = FusionConfig(enabled=False)


def test_one_qubit_intensity():
    assert kernel_cost(1, 0, 10, Precision.SINGLE).arithmetic_intensity == 0.875


def test_three_qubit_intensity():
    assert kernel_cost(3, 0, 10, Precision.SINGLE).arithmetic_intensity == 3.875
    assert classify_bound(A100, 3.875) == "memory-bound"


def test_controlled_cost_scales_down():
    full = kernel_cost(1, 0, 10)
    ctl = kernel_cost(1, 2, 10)
    assert ctl.flops * 4 == full.flops and ctl.bytes * 4 == full.bytes
    assert ctl.kernel_class == "controlled"


def test_double_precision_bytes():
    assert kernel_cost(1, 0, 3, Precision.DOUBLE).bytes == 8 * 32


@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 10))
def test_cost_monotone_in_qubits(k, c, extra):
    n = k + c + extra
    a, b = kernel_cost(k, c, n), kernel_cost(k, c, n + 1)
    assert b.flops == 2 * a.flops and b.bytes == 2 * a.bytes


def test_invalid_shape():
    with pytest.raises(ValueError):
        kernel_cost(3, 1, 3)


def test_kernel_class_names():
    assert [kernel_class(k) for k in (1, 2, 3, 4)] == ["1q", "2q", "3q", "generic"]


def test_machine_model():
    assert A100.name == "A100-40GB"
    assert 6.7 <= A100.ridge_point() <= 6.8
    assert A100.peak_flops("double") < A100.peak_flops("single")
    assert classify_bound(A100, kernel_cost(1, 0, 20)) == "memory-bound"
    assert classify_bound(A100, 100.0) == "compute-bound"
    assert roofline_attainable(A100, 100.0) == A100.peak_flops_sp
    assert roofline_attainable(A100, 1.0) == A100.peak_bandwidth


def test_parse_machine_and_errors(tmp_path):
    m = parse_machine("# toy\nname = toy\npeak_bw_gib_s = 1\npeak_sp_tflops = 2\n")
    assert m.peak_flops_dp == m.peak_flops_sp == 2e12
    with pytest.raises(ValueError):
        parse_machine("name = x\n")
    with pytest.raises(ValueError):
        parse_machine("garbage")
    path = tmp_path / "toy.model"
    path.write_text("peak_bw_gib_s = 1\npeak_sp_tflops = 1\n")
    assert load_machine(path).peak_bandwidth == 2**30
    assert load_machine("a100.model") == A100
    with pytest.raises(FileNotFoundError):
        load_machine("nonexistent")


def test_ledger_matches_sum_over_gates():
    c = gen_qv(8, 10, seed=3)
    res = run(c, RunConfig(fusion=OFF, precision="single"))
    assert res.ledger.flops == circuit_cost(c, Precision.SINGLE).flops
    assert res.ledger.bytes == circuit_cost(c, Precision.SINGLE).bytes


def test_ledger_roundtrip_and_merge():
    led = run(gen_ghz(5)).ledger
    back = PerfLedger.from_dict(led.as_dict())
    assert back.as_dict() == led.as_dict()
    back.merge(led)
    assert back.flops == 2 * led.flops


def test_roofline_report_rows():
    led = PerfLedger(precision=Precision.SINGLE)
    led.record(KernelCost("1q", 14, 16), 1e-3)
    led.record(KernelCost("controlled", 7, 8), 0.0)
    rows = roofline_report(led)
    assert [r["kernel_class"] for r in rows] == ["1q", "controlled"]
    assert rows[0]["intensity"] == 0.875 and rows[0]["reliable"]
    assert not rows[1]["reliable"] and math.isnan(rows[1]["achieved"])
    assert sum(r["flops"] for r in rows) == led.flops
    assert all(r["machine"] == "A100-40GB" for r in rows)


def test_scaling_table_ghz():
    variants = {"on": RunConfig(), "off": RunConfig(fusion=OFF)}
    rows = scaling_table("ghz", range(4, 15), variants, repeats=2)
    assert len(rows) == 22
    assert all(r["repeats"] == 2 and r["std_s"] >= 0 for r in rows)
    flops = [r["flops"] for r in rows if r["variant"] == "off"]
    assert flops == sorted(flops) and len(set(flops)) == len(flops)


def test_scaling_table_qv_flops_exact():
    rows = scaling_table("qv", range(4, 13), {"off": RunConfig(fusion=OFF)}, repeats=1, depth=10)
    for r in rows:
        assert r["flops"] == circuit_cost(gen_qv(r["qubits"], 10), Precision.DOUBLE).flops


def test_scaling_table_empty_and_skipped():
    assert scaling_table("ghz", range(0), {"a": RunConfig()}) == []
    rows = scaling_table("ghz", [3, 12], {"tiny": RunConfig(budget=1024)}, repeats=1)
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"].startswith("skipped")


def test_to_csv():
    rows = [{"a": 1, "b": 2.5}, {"a": 3, "b": 4.0}]
    parsed = list(csv.DictReader(io.StringIO(to_csv(rows))))
    assert parsed == [{"a": "1", "b": "2.5"}, {"a": "3", "b": "4.0"}]
    assert to_csv([]) == ""
