import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svsim import circuit as C
from svsim.bench import (
    APPS, BenchSpec, gen, gen_ghz, gen_grover, gen_qft, gen_qv, gen_qw, gen_rqc,
    grover_gate_count, grover_iterations, haar_unitary, mcphase_gates, mcx_gates,
    qft_gate_count, qw_position_distribution, rqc_gate_count, rqc_pairs,
)
from svsim.circuit import Circuit, GateKind, is_unitary, stats, validate

from oracle import dense_operator, dense_run, dense_unitary


@pytest.mark.parametrize("n", [1, 2, 5, 31])
def test_qft_gate_count(n):
    assert len(gen_qft(n).gates) == qft_gate_count(n)


def test_qv_structure():
    c = gen_qv(7, 4, seed=1)
    assert len(c.gates) == 4 * 3
    assert all(g.kind is GateKind.SU4 and is_unitary(g.matrix) for g in c.gates)
    assert abs(np.linalg.det(c.gates[0].matrix) - 1) < 1e-12


def test_generators_deterministic():
    for app in APPS:
        spec = BenchSpec(app, 5, seed=4)
        a, b = gen(spec), gen(spec)
        assert a.gates == b.gates


def test_qv_seed_changes_circuit():
    assert gen_qv(4, 2, seed=0).gates != gen_qv(4, 2, seed=1).gates


def test_rqc_no_repeated_single_qubit_gate():
    c = gen_rqc(5, 20, seed=7)
    last = {}
    for g in c.gates:
        if len(g.qubits) == 1:
            assert last.get(g.targets[0]) is not g.kind
            last[g.targets[0]] = g.kind
    assert len(c.gates) == rqc_gate_count(5, 20)


def test_rqc_pairs_cover_all_edges():
    edges = {p for layer in range(4) for p in rqc_pairs(9, layer)}
    assert edges == {(i, i + 1) for i in range(8)}


def test_ghz_closed_form():
    st_ = stats(gen_ghz(7))
    assert (st_.total_gates, st_.depth, st_.non_local_gates) == (7, 7, 6)


@pytest.mark.parametrize("n,marked,it", [(3, 5, 1), (4, 0, 2), (5, 31, 1)])
def test_grover_gate_count(n, marked, it):
    assert len(gen_grover(n, marked, it).gates) == grover_gate_count(n, marked, it)


def test_grover_iterations_formula():
    assert [grover_iterations(n) for n in (2, 3, 4, 10)] == [1, 2, 3, 25]


def test_grover_rejects_bad_marked():
    with pytest.raises(ValueError):
        gen_grover(3, 8)


@pytest.mark.parametrize("n", range(2, 8))
@pytest.mark.parametrize("n_free", [0, 1, 2])
def test_mcx_decomposition(n, n_free):
    controls = tuple(range(n - 1))
    target = n - 1
    total = n + n_free
    free = tuple(range(n, total))
    got = dense_unitary(Circuit(total, tuple(mcx_gates(controls, target, free))))
    want = dense_operator(C.mcx(controls, target), total)
    np.testing.assert_allclose(got, want, atol=1e-10)


def _classical(gates, x):
    for g in gates:
        if all((x >> c) & 1 for c in g.controls):
            x ^= 1 << g.targets[0]
    return x


@pytest.mark.parametrize("k,n_free", [(4, 2), (5, 3), (6, 4), (7, 1), (8, 3)])
def test_mcx_truth_table_with_dirty_ancillas(k, n_free):
    controls, target = tuple(range(k)), k
    free = tuple(range(k + 1, k + 1 + n_free))
    gates = mcx_gates(controls, target, free)
    assert {g.kind for g in gates} <= {GateKind.X, GateKind.CX, GateKind.CCX}
    ones = (1 << k) - 1
    for x in range(1 << (k + 1 + n_free)):
        want = x ^ (1 << target) if x & ones == ones else x
        assert _classical(gates, x) == want


def test_mcx_uses_only_small_gates():
    gates = mcx_gates(tuple(range(6)), 6, (7, 8, 9, 10))
    assert {g.kind for g in gates} <= {GateKind.X, GateKind.CX, GateKind.CCX}
    assert sum(g.kind is GateKind.CCX for g in gates) == 4 * (6 - 2)


@given(st.floats(-math.pi, math.pi, allow_nan=False), st.integers(1, 4))
@settings(max_examples=20, deadline=None)
def test_mcphase(theta, k):
    controls, target = tuple(range(k)), k
    got = dense_unitary(Circuit(k + 1, tuple(mcphase_gates(theta, controls, target))))
    want = np.eye(2 ** (k + 1), dtype=complex)
    want[-1, -1] = np.exp(1j * theta)
    np.testing.assert_allclose(got, want, atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_qw_shift_operator(n):
    # one step from the walker at site 0: coin flip then shift by +-1
    sites = 2 ** (n - 1)
    psi = dense_run(gen_qw(n, 1))
    dist = qw_position_distribution(psi)
    want = np.zeros(sites)
    want[1 % sites] += 0.5
    want[-1 % sites] += 0.5
    np.testing.assert_allclose(dist, want, atol=1e-12)


def test_qw_parity_after_odd_steps():
    dist = qw_position_distribution(dense_run(gen_qw(5, 3)))
    assert abs(dist.sum() - 1) < 1e-12
    assert dist[0::2].sum() < 1e-12 or dist[1::2].sum() < 1e-12  # parity after odd steps


def test_qw_gate_widths():
    assert max(len(g.qubits) for g in gen_qw(10).gates) <= 3
    assert not validate(gen_qw(10))


def test_benchspec_validation():
    with pytest.raises(ValueError):
        BenchSpec("nope", 4)
    with pytest.raises(ValueError):
        BenchSpec("qv", 1)
    assert BenchSpec("QFT", 3).app == "qft"


def test_gen_metadata():
    c = gen(BenchSpec("qv", 4, depth=2, seed=9))
    assert c.metadata["spec"]["seed"] == 9 and c.metadata["app"] == "qv"


def test_haar_unitary_is_special_unitary():
    u = haar_unitary(4, np.random.default_rng(0))
    assert is_unitary(u)
    assert abs(np.linalg.det(u) - 1) < 1e-12
