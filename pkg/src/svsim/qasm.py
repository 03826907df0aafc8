"""OpenQASM 2.0 subset: parse into a :class:`Circuit` and emit back.

Accepted: the ``OPENQASM 2.0;`` header, ``include``, ``qreg``/``creg``,
``barrier``, ``measure`` and the gates h x y z s t sx rx ry rz u1 u2 u3 u p
cx cz cp cu1 ccx swap, plus the extensions ``sy``, ``mcx`` and ``mcz``
(last operand is the target). Quantum registers are flattened into one index
space in declaration order. ``gate``/``opaque``/``if``/``reset`` are rejected.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuit import Circuit, Gate, GateKind

MAX_EXPR_DEPTH = 64


class QasmError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


class EmitError(ValueError):
    pass


# gate table: name -> (kind, n_params, n_qubits or None for >= 2, control count rule)
_GATES = {
    "h": (GateKind.H, 0, 1), "x": (GateKind.X, 0, 1), "y": (GateKind.Y, 0, 1),
    "z": (GateKind.Z, 0, 1), "s": (GateKind.S, 0, 1), "t": (GateKind.T, 0, 1),
    "sx": (GateKind.SQRT_X, 0, 1), "sy": (GateKind.SQRT_Y, 0, 1),
    "rx": (GateKind.RX, 1, 1), "ry": (GateKind.RY, 1, 1), "rz": (GateKind.RZ, 1, 1),
    "p": (GateKind.P, 1, 1), "u1": (GateKind.P, 1, 1),
    "u2": (GateKind.U, 2, 1), "u3": (GateKind.U, 3, 1), "u": (GateKind.U, 3, 1),
    "U": (GateKind.U, 3, 1),
    "cx": (GateKind.CX, 0, 2), "CX": (GateKind.CX, 0, 2), "cz": (GateKind.CZ, 0, 2),
    "cp": (GateKind.CP, 1, 2), "cu1": (GateKind.CP, 1, 2),
    "ccx": (GateKind.CCX, 0, 3), "swap": (GateKind.SWAP, 0, 2),
    "mcx": (GateKind.MCX, 0, None), "mcz": (GateKind.MCZ, 0, None),
}
_UNSUPPORTED = {"gate", "opaque", "if", "reset"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,\[\]()+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str):
    """Yield tokens lazily so errors surface in source order."""
    pos, line, line_start = 0, 1, 0
    end = len(text)
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            yield Token(kind, m.group(), line, pos - line_start + 1)
        pos = m.end()
    yield Token("eof", "", line, pos - line_start + 1)


_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}


class _Parser:
    def __init__(self, tokens):
        self._stream = iter(tokens)
        self._cur = next(self._stream)
        self.qregs: dict[str, tuple[int, int]] = {}
        self.cregs: dict[str, tuple[int, int]] = {}
        self.nq = 0
        self.nc = 0
        self.gates: list[Gate] = []
        self.measured = False

    # token helpers
    @property
    def tok(self) -> Token:
        return self._cur

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return QasmError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self._cur
        if t.kind != "eof":
            self._cur = next(self._stream)
        return t

    def expect(self, text=None, kind=None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(t.text) if t.kind != "eof" else "end of input"
            raise self.error(f"expected {want}, found {got}")
        return self.next()

    # grammar
    def program(self) -> Circuit:
        self.header()
        while self.tok.kind != "eof":
            self.statement()
        if not self.qregs:
            raise self.error("no qreg declared")
        return Circuit(self.nq, tuple(self.gates), "")

    def header(self):
        t = self.tok
        if t.text != "OPENQASM":
            raise self.error("missing 'OPENQASM 2.0;' header")
        self.next()
        v = self.expect(kind="real")
        if v.text not in ("2.0", "2"):
            raise self.error(f"unsupported OpenQASM version {v.text}", v)
        self.expect(";")

    def statement(self):
        t = self.tok
        if t.kind != "id":
            raise self.error(f"unexpected {t.text!r}")
        name = t.text
        if name in _UNSUPPORTED:
            raise self.error(f"unsupported construct '{name}'")
        if name == "include":
            self.next()
            self.expect(kind="string")
            self.expect(";")
        elif name in ("qreg", "creg"):
            self.register(name)
        elif name == "measure":
            self.measure()
        elif name == "barrier":
            self.next()
            groups = self.arglist()
            self.expect(";")
            qubits = sorted({q for grp in groups for q in grp})
            self.gates.append(Gate(GateKind.BARRIER, tuple(qubits)))
        elif name in _GATES:
            self.gate()
        else:
            raise self.error(f"unknown gate '{name}'")

    def register(self, which):
        self.next()
        name_tok = self.expect(kind="id")
        self.expect("[")
        size_tok = self.expect(kind="real")
        if not size_tok.text.isdigit() or int(size_tok.text) < 1:
            raise self.error("register size must be a positive integer", size_tok)
        self.expect("]")
        self.expect(";")
        name, size = name_tok.text, int(size_tok.text)
        if name in self.qregs or name in self.cregs:
            raise self.error(f"register '{name}' already declared", name_tok)
        if which == "qreg":
            self.qregs[name] = (self.nq, size)
            self.nq += size
        else:
            self.cregs[name] = (self.nc, size)
            self.nc += size

    def argument(self, regs, what) -> list[int]:
        name_tok = self.expect(kind="id")
        if name_tok.text not in regs:
            raise self.error(f"undeclared {what} register '{name_tok.text}'", name_tok)
        offset, size = regs[name_tok.text]
        if self.tok.text != "[":
            return list(range(offset, offset + size))
        self.next()
        idx_tok = self.expect(kind="real")
        if not idx_tok.text.isdigit():
            raise self.error("register index must be an integer", idx_tok)
        idx = int(idx_tok.text)
        if idx >= size:
            raise self.error(f"index {idx} out of range for {name_tok.text}[{size}]", idx_tok)
        self.expect("]")
        return [offset + idx]

    def arglist(self, regs=None, what="quantum") -> list[list[int]]:
        regs = self.qregs if regs is None else regs
        args = [self.argument(regs, what)]
        while self.tok.text == ",":
            self.next()
            args.append(self.argument(regs, what))
        return args

    def _broadcast(self, groups, tok) -> list[tuple[int, ...]]:
        sizes = {len(g) for g in groups if len(g) > 1}
        if len(sizes) > 1:
            raise self.error("register arguments of different sizes", tok)
        width = sizes.pop() if sizes else 1
        return [tuple(g[i] if len(g) > 1 else g[0] for g in groups) for i in range(width)]

    def _check_unitary_allowed(self, tok):
        if self.measured:
            raise self.error("gate after measurement (mid-circuit measurement unsupported)", tok)

    def gate(self):
        name_tok = self.next()
        kind, n_params, n_qubits = _GATES[name_tok.text]
        params = []
        if self.tok.text == "(":
            self.next()
            if self.tok.text != ")":
                params.append(self.expr())
                while self.tok.text == ",":
                    self.next()
                    params.append(self.expr())
            self.expect(")")
        if len(params) != n_params:
            raise self.error(
                f"'{name_tok.text}' takes {n_params} parameter(s), got {len(params)}", name_tok
            )
        groups = self.arglist()
        self.expect(";")
        if n_qubits is None:
            if len(groups) < 2:
                raise self.error(f"'{name_tok.text}' needs at least 2 qubit arguments", name_tok)
        elif len(groups) != n_qubits:
            raise self.error(
                f"'{name_tok.text}' takes {n_qubits} qubit argument(s), got {len(groups)}", name_tok
            )
        self._check_unitary_allowed(name_tok)
        if name_tok.text == "u2":
            params = [math.pi / 2, *params]
        for ops in self._broadcast(groups, name_tok):
            if len(set(ops)) != len(ops):
                raise self.error(f"overlapping operands for '{name_tok.text}'", name_tok)
            if kind is GateKind.SWAP:
                g = Gate(kind, ops)
            elif len(ops) == 1:
                g = Gate(kind, ops, params=params)
            else:
                g = Gate(kind, (ops[-1],), ops[:-1], params)
            self.gates.append(g)

    def measure(self):
        tok = self.next()
        q = self.argument(self.qregs, "quantum")
        self.expect(kind="arrow")
        c = self.argument(self.cregs, "classical")
        self.expect(";")
        if len(q) != len(c):
            raise self.error("measure register sizes differ", tok)
        self.measured = True
        for qi, ci in zip(q, c):
            self.gates.append(Gate(GateKind.MEASURE, (qi,), clbits=(ci,)))

    # expressions: sum := term (('+'|'-') term)*; term := unary (('*'|'/') unary)*;
    # unary := '-' unary | power; power := atom ('^' unary)?
    def expr(self, depth=0):
        if depth > MAX_EXPR_DEPTH:
            raise self.error("expression nested too deeply")
        val = self.term(depth)
        while self.tok.text in ("+", "-"):
            op = self.next().text
            rhs = self.term(depth)
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self, depth):
        val = self.unary(depth)
        while self.tok.text in ("*", "/"):
            op_tok = self.next()
            rhs = self.unary(depth)
            if op_tok.text == "/":
                if rhs == 0:
                    raise self.error("division by zero", op_tok)
                val = val / rhs
            else:
                val = val * rhs
        return val

    def unary(self, depth):
        if depth > MAX_EXPR_DEPTH:
            raise self.error("expression nested too deeply")
        if self.tok.text == "-":
            self.next()
            return -self.unary(depth + 1)
        if self.tok.text == "+":
            self.next()
            return self.unary(depth + 1)
        base = self.atom(depth)
        if self.tok.text == "^":
            op_tok = self.next()
            exp = self.unary(depth + 1)
            try:
                return float(base ** exp)
            except (OverflowError, ZeroDivisionError, TypeError):
                raise self.error("invalid power", op_tok) from None
        return base

    def atom(self, depth):
        t = self.tok
        if t.kind == "real":
            self.next()
            return float(t.text)
        if t.kind == "id":
            self.next()
            if t.text == "pi":
                return math.pi
            if t.text in _FUNCS:
                self.expect("(")
                arg = self.expr(depth + 1)
                self.expect(")")
                try:
                    return float(_FUNCS[t.text](arg))
                except (ValueError, OverflowError):
                    raise self.error(f"math domain error in {t.text}()", t) from None
            raise self.error(f"unknown identifier '{t.text}' in expression", t)
        if t.text == "(":
            self.next()
            val = self.expr(depth + 1)
            self.expect(")")
            return val
        raise self.error("expected expression", t)


def parse(text: str | bytes) -> Circuit:
    """Parse OpenQASM 2.0 source; raises :class:`QasmError` with line/column on failure."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(text[: exc.start]).decode("utf-8", errors="replace")
            line = prefix.count("\n") + 1
            col = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise QasmError("invalid UTF-8 input", line, col) from None
    tokens = tokenize(text)
    try:
        circuit = _Parser(tokens).program()
    except RecursionError:
        raise QasmError("input nested too deeply") from None
    for g in circuit.gates:
        if not all(math.isfinite(p) for p in g.params):
            raise QasmError(f"non-finite parameter in {g.kind.name}")
    return circuit


def parse_file(path) -> Circuit:
    with open(path, "rb") as fh:
        return parse(fh.read())


# emission --------------------------------------------------------------------

_EMIT_NAME = {
    GateKind.H: "h", GateKind.X: "x", GateKind.Y: "y", GateKind.Z: "z",
    GateKind.S: "s", GateKind.T: "t", GateKind.SQRT_X: "sx", GateKind.SQRT_Y: "sy",
    GateKind.RX: "rx", GateKind.RY: "ry", GateKind.RZ: "rz", GateKind.P: "p",
    GateKind.U: "u3", GateKind.CX: "cx", GateKind.CZ: "cz", GateKind.CP: "cp",
    GateKind.CCX: "ccx", GateKind.SWAP: "swap", GateKind.MCX: "mcx", GateKind.MCZ: "mcz",
}


def _angle(v: float) -> str:
    return format(v, ".17g")


def emit(c: Circuit, register: str = "q", creg: str = "c") -> str:
    """Serialize ``c``; SU4/UNITARY payload gates are rejected (lower them first)."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    for key in sorted(c.metadata):
        val = c.metadata[key]
        if isinstance(val, (str, int, float, bool)) and "\n" not in str(val):
            lines.append(f"// {key} = {val}")
    lines.append(f"qreg {register}[{c.n_qubits}];")
    measures = [g for g in c.gates if g.kind is GateKind.MEASURE]
    if measures:
        width = max(g.clbits[0] if g.clbits else g.targets[0] for g in measures) + 1
        lines.append(f"creg {creg}[{width}];")

    def q(i):
        return f"{register}[{i}]"

    for pos, g in enumerate(c.gates):
        if g.kind is GateKind.MEASURE:
            cb = g.clbits[0] if g.clbits else g.targets[0]
            lines.append(f"measure {q(g.targets[0])} -> {creg}[{cb}];")
            continue
        if g.kind is GateKind.BARRIER:
            lines.append("barrier " + ",".join(q(i) for i in g.targets) + ";")
            continue
        name = _EMIT_NAME.get(g.kind)
        if name is None:
            raise EmitError(
                f"gate {pos} ({g.kind.name} on qubits {list(g.qubits)}) cannot be emitted; "
                "run su4_decompose for SU4 payloads"
            )
        params = f"({','.join(_angle(p) for p in g.params)})" if g.params else ""
        ops = g.targets if g.kind is GateKind.SWAP else g.controls + g.targets
        lines.append(f"{name}{params} " + ",".join(q(i) for i in ops) + ";")
    return "\n".join(lines) + "\n"


def gates_equal(a: Gate, b: Gate, atol: float = 1e-15) -> bool:
    if (a.kind, a.targets, a.controls, a.clbits) != (b.kind, b.targets, b.controls, b.clbits):
        return False
    if len(a.params) != len(b.params):
        return False
    return all(abs(x - y) <= atol for x, y in zip(a.params, b.params))


def roundtrip_check(c: Circuit) -> bool:
    back = parse(emit(c))
    if back.n_qubits != c.n_qubits or len(back.gates) != len(c.gates):
        return False
    return all(gates_equal(a, b) for a, b in zip(c.gates, back.gates))
