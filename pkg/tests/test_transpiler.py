import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svsim import circuit as C
from svsim.bench import gen_ghz, gen_qft, gen_qv, gen_qw, gen_rqc, haar_unitary
from svsim.circuit import Circuit, GateKind, gate_matrix, u_matrix
from svsim.core import Precision
from svsim.transpiler import (
    BlockingError, FusionConfig, block_pass, fuse_group, fuse_pass, su4_decompose, su4_gates,
    sweep_blocking, zyz_angles,
)

from oracle import dense_run, dense_unitary

FORCE = FusionConfig(fusion_threshold=0)


def _equal_up_to_phase(a, b, atol=1e-12):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = a[idx] / b[idx]
    return abs(abs(phase) - 1) < atol and np.max(np.abs(a - phase * b)) < atol


# fusion ---------------------------------------------------------------------------

def test_fusion_disabled_or_below_threshold_is_identity():
    c = gen_qft(6)
    assert fuse_pass(c, FusionConfig(enabled=False)) is c
    assert fuse_pass(c, FusionConfig(fusion_threshold=7)) is c


def test_fusion_groups_respect_width():
    c = gen_rqc(6, 6, seed=3)
    for k in (1, 2, 3):
        out = fuse_pass(c, FusionConfig(fusion_threshold=0, max_fused_qubits=k))
        assert all(len(g.qubits) <= max(k, 2) for g in out.gates)
        np.testing.assert_allclose(dense_run(out), dense_run(c), atol=1e-12)


def test_fusion_provenance_covers_every_gate():
    c = gen_qft(5)
    out = fuse_pass(c, FORCE)
    prov = out.metadata["fusion_provenance"]
    assert len(prov) == len(out.gates)
    assert sorted(i for group in prov for i in group) == list(range(len(c.gates)))


def test_fusion_single_gate_groups_unchanged():
    c = Circuit(8, tuple(C.cx(i, i + 1) for i in range(0, 7, 2)))
    out = fuse_pass(c, FusionConfig(fusion_threshold=0, max_fused_qubits=2))
    assert out.gates == c.gates


def test_fusion_keeps_measure_and_barrier():
    c = Circuit(2, (C.h(0), C.barrier((0, 1)), C.cx(0, 1), C.measure(0, 0)))
    out = fuse_pass(c, FORCE)
    kinds = [g.kind for g in out.gates]
    assert GateKind.BARRIER in kinds and kinds[-1] is GateKind.MEASURE


def test_fuse_group_matches_dense():
    gates = [C.h(0), C.cx(0, 2), C.rz(0.3, 2)]
    fu = fuse_group(gates, (0, 1, 2))
    assert fu.qubits == (0, 2)
    want = dense_unitary(Circuit(3, tuple(gates)))
    got = dense_unitary(Circuit(3, (fu.as_gate(),)))
    np.testing.assert_allclose(got, want, atol=1e-14)


@given(st.integers(3, 6), st.integers(0, 10_000), st.integers(1, 3))
@settings(max_examples=25, deadline=None)
def test_fusion_preserves_unitary(n, seed, width):
    c = gen_rqc(n, 4, seed)
    out = fuse_pass(c, FusionConfig(fusion_threshold=0, max_fused_qubits=width))
    np.testing.assert_allclose(dense_unitary(out), dense_unitary(c), atol=1e-12)


def test_fusion_config_validation():
    with pytest.raises(ValueError):
        FusionConfig(max_fused_qubits=0)


# blocking -------------------------------------------------------------------------

@pytest.mark.parametrize("b", [2, 3, 4, 5])
def test_block_pass_equivalent_and_local(b):
    c = gen_qv(5, 3, seed=b)
    plan = block_pass(c, b)
    for i, g in enumerate(plan.circuit.gates):
        if g.kind.is_unitary and not plan.is_exchange(i):
            assert max(g.qubits) < b
    assert plan.final_layout == tuple(range(5))
    assert _equal_up_to_phase(dense_unitary(plan.circuit), dense_unitary(c))


def test_block_pass_no_swaps_when_b_equals_n():
    plan = block_pass(gen_qft(5), 5)
    assert plan.inserted_swaps == 0 and plan.predicted_inter_chunk_bytes() == 0


def test_block_pass_moves_measurements_after_restore():
    c = Circuit(3, (C.h(2), C.cx(2, 0), C.measure(2, 0), C.measure(0, 1)))
    plan = block_pass(c, 2)
    kinds = [g.kind for g in plan.circuit.gates]
    assert kinds[-2:] == [GateKind.MEASURE, GateKind.MEASURE]
    assert plan.circuit.gates[-2].targets == (2,)


def test_block_pass_infeasible():
    with pytest.raises(BlockingError, match="infeasible"):
        block_pass(Circuit(4, (C.ccx(0, 1, 3),)), 2)
    with pytest.raises(BlockingError):
        block_pass(gen_ghz(3), 0)


def test_exchange_bytes_prediction():
    plan = block_pass(gen_ghz(6), 3)
    assert plan.exchange_swaps > 0
    assert plan.predicted_inter_chunk_bytes(Precision.SINGLE) == plan.exchange_swaps * 32 * 8


def test_sweep_blocking_rows():
    rows = sweep_blocking(gen_qw(6), [3, 4, 5, 6])
    assert [r["blocking_qubits"] for r in rows] == [3, 4, 5, 6]
    assert rows[-1]["inserted_swaps"] == 0
    assert all(r["exchange_swaps"] <= r["inserted_swaps"] for r in rows)


# SU(4) lowering -------------------------------------------------------------------

@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_zyz_roundtrip(seed):
    m = haar_unitary(2, np.random.default_rng(seed), special=False)
    theta, phi, lam, phase = zyz_angles(m)
    np.testing.assert_allclose(np.exp(1j * phase) * u_matrix(theta, phi, lam), m, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_su4_gates_exact(seed):
    m = haar_unitary(4, np.random.default_rng(seed))
    gates = su4_gates(m, 0, 1)
    assert {g.kind for g in gates} <= {GateKind.U, GateKind.CX}
    assert sum(g.kind is GateKind.CX for g in gates) <= 6
    got = dense_unitary(Circuit(2, tuple(gates)))
    assert _equal_up_to_phase(got, m)


def test_su4_decompose_circuit():
    c = gen_qv(4, 2, seed=5)
    out = su4_decompose(c)
    assert not any(g.kind is GateKind.SU4 for g in out.gates)
    assert _equal_up_to_phase(dense_unitary(out), dense_unitary(c))


def test_su4_reversed_operands():
    m = haar_unitary(4, np.random.default_rng(0))
    c = Circuit(3, (C.su4(m, 2, 0),))
    assert _equal_up_to_phase(dense_unitary(su4_decompose(c)), dense_unitary(c))


def test_gate_matrix_unchanged_by_lowering():
    g = C.su4(haar_unitary(4, np.random.default_rng(1)), 0, 1)
    before = gate_matrix(g).copy()
    su4_gates(g.matrix, 0, 1)
    np.testing.assert_array_equal(gate_matrix(g), before)
