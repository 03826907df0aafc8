import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from svsim import circuit as C
from svsim.bench import gen_ghz, gen_grover, gen_qft, gen_qv, gen_qw, gen_rqc
from svsim.circuit import Circuit, GateKind, stats
from svsim.qasm import EmitError, QasmError, emit, parse, roundtrip_check
from svsim.transpiler import su4_decompose

HEAD = "OPENQASM 2.0;\n"


def test_minimal():
    c = parse("OPENQASM 2.0; qreg q[1]; h q[0];")
    assert c.n_qubits == 1
    assert list(c.gates) == [C.h(0)]


def test_ghz2_stats():
    c = parse('OPENQASM 2.0; include "qelib1.inc"; qreg q[2]; h q[0]; cx q[0],q[1];')
    st_ = stats(c)
    assert st_.total_gates == 2 and st_.non_local_percent == 50


def test_missing_header():
    with pytest.raises(QasmError) as exc:
        parse("h q[0];")
    assert exc.value.line == 1


def test_registers_flatten_in_order():
    c = parse(HEAD + "qreg a[2];\nqreg b[3];\ncx a[1],b[2];\n")
    assert c.n_qubits == 5
    assert c.gates[0] == C.cx(1, 4)


def test_angle_expressions():
    c = parse(HEAD + "qreg q[1];\nrz(-pi/4 + 2*pi^2) q[0];\nu1(sqrt(2)*cos(0)) q[0];\n")
    assert c.gates[0].params[0] == pytest.approx(-math.pi / 4 + 2 * math.pi**2)
    assert c.gates[1].kind is GateKind.P
    assert c.gates[1].params[0] == pytest.approx(math.sqrt(2))


def test_gate_aliases():
    c = parse(HEAD + "qreg q[2];\nu2(0.1,0.2) q[0];\nu3(1,2,3) q[1];\ncu1(0.5) q[0],q[1];\nCX q[1],q[0];\n")
    assert c.gates[0] == C.u(math.pi / 2, 0.1, 0.2, 0)
    assert c.gates[1] == C.u(1, 2, 3, 1)
    assert c.gates[2] == C.cp(0.5, 0, 1)
    assert c.gates[3] == C.cx(1, 0)


def test_register_broadcast():
    c = parse(HEAD + "qreg q[3];\ncreg c[3];\nh q;\nmeasure q -> c;\n")
    assert [g.kind for g in c.gates] == [GateKind.H] * 3 + [GateKind.MEASURE] * 3
    assert c.gates[5].clbits == (2,)


def test_comments_and_whitespace_ignored():
    a = parse(HEAD + "qreg q[2];\nh q[0];\ncx q[0],q[1];\n")
    b = parse("// leading\nOPENQASM   2.0 ;\n\n  qreg q [ 2 ] ; // x\nh\tq[0];cx q[0] , q[1];")
    assert a.gates == b.gates


@pytest.mark.parametrize("src,fragment,line,col", [
    (HEAD + "qreg q[1];\nfoo q[0];", "unknown gate 'foo'", 3, 1),
    (HEAD + "qreg q[1];\ncx q[0];", "takes 2 qubit", 3, 1),
    (HEAD + "qreg q[1];\nh r[0];", "undeclared", 3, 3),
    (HEAD + "qreg q[2];\nh q[2];", "out of range", 3, 5),
    (HEAD + "qreg q[1];\nh q[0] $", "unexpected character", 3, 8),
    (HEAD + "gate foo a { h a; }", "unsupported construct", 2, 1),
    (HEAD + "qreg q[1];\ncreg c[1];\nif(c==1) x q[0];", "unsupported construct", 4, 1),
    (HEAD + "opaque g q;", "unsupported construct", 2, 1),
    (HEAD + "qreg q[1];\nrx q[0];", "parameter", 3, 1),
    (HEAD + "qreg q[2];\ncx q[1],q[1];", "overlapping", 3, 1),
    (HEAD + "qreg q[1];\nrx(1/0) q[0];", "division by zero", 3, 5),
    (HEAD + "qreg q[1];\ncreg c[1];\nmeasure q[0] -> c[0];\nh q[0];", "measurement", 5, 1),
])
def test_positioned_errors(src, fragment, line, col):
    with pytest.raises(QasmError) as exc:
        parse(src)
    assert fragment in exc.value.message
    assert (exc.value.line, exc.value.col) == (line, col)


def test_deep_nesting_is_an_error():
    with pytest.raises(QasmError):
        parse(HEAD + "qreg q[1];\nrx(" + "(" * 5000 + "1" + ")" * 5000 + ") q[0];")


def test_invalid_utf8():
    with pytest.raises(QasmError) as exc:
        parse(b"OPENQASM 2.0;\nqreg q[1];\n\xff")
    assert exc.value.line == 3


def test_emit_qft4_statement_counts():
    text = emit(gen_qft(4))
    body = [line.split()[0].split("(")[0] for line in text.splitlines()
            if line and not line.startswith(("//", "OPENQASM", "include", "qreg", "creg"))]
    assert body.count("h") == 4 and body.count("cp") == 6 and body.count("swap") == 2


def test_emit_rejects_payload_gates():
    with pytest.raises(EmitError, match="UNITARY"):
        emit(Circuit(1, (C.unitary(np.eye(2), (0,)),)))
    with pytest.raises(EmitError, match="su4_decompose"):
        emit(gen_qv(4, 1))


def test_emit_angles_full_precision():
    theta = 0.1 + 1e-16 * 3
    text = emit(Circuit(1, (C.rz(theta, 0),)))
    assert parse(text).gates[0].params[0] == theta


def test_measure_roundtrip():
    c = Circuit(2, (C.h(0), C.measure(1, 0), C.measure(0, 1)))
    assert roundtrip_check(c)


@pytest.mark.parametrize("c", [gen_ghz(5), gen_qft(6), su4_decompose(gen_qv(4, 2)),
                               gen_rqc(5, 4), gen_grover(4, 3), gen_qw(4, 2)],
                         ids=["ghz", "qft", "qv", "rqc", "grover", "qw"])
def test_roundtrip(c):
    assert roundtrip_check(c)


@given(st.binary(max_size=2000))
@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_fuzz_bytes(data):
    try:
        parse(data)
    except QasmError as exc:
        assert exc.line >= 1 and exc.col >= 1


_ALPHABET = st.sampled_from(list("qreg[]();,->/*+-^pi0123456789.hxcumsrtz \n\"") +
                            ["OPENQASM 2.0;", "qreg q[3];", "cx", "measure", "creg c[2];"])


@given(st.lists(_ALPHABET, max_size=80).map("".join))
@settings(max_examples=300, deadline=None)
def test_fuzz_tokens(text):
    try:
        c = parse(text)
    except QasmError as exc:
        assert exc.line >= 1 and exc.col >= 1
    else:
        assert isinstance(c, Circuit)


def test_large_input_does_not_crash():
    text = HEAD + "qreg q[2];\n" + "h q[0];\n" * 50000 + "bogus"
    with pytest.raises(QasmError) as exc:
        parse(text)
    assert exc.value.line == 50003
