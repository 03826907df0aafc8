"""Deterministic generators for the six benchmark applications.

QV, QFT, RQC, Grover, GHZ and the 1-D quantum walk (QW). Random choices
draw from a PCG64 stream seeded by the ``seed`` argument, so identical
arguments give identical circuits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, GateKind
from . import circuit as C

APPS = ("qv", "qft", "rqc", "grover", "ghz", "qw")
_MIN_QUBITS = {"qv": 2, "qw": 2, "rqc": 2, "grover": 2, "qft": 1, "ghz": 1}


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def haar_unitary(dim: int, rng: np.random.Generator, special: bool = True) -> np.ndarray:
    """Haar-distributed unitary from the QR of a complex Ginibre matrix with phase fix-up."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    if special:
        q = q / np.linalg.det(q) ** (1 / dim)
    return q


def _circuit(name, n, gates, **meta) -> Circuit:
    return Circuit(n, tuple(gates), name, {"app": name, "n_qubits": n, **meta})


def gen_qv(n: int, depth: int = 10, seed: int = 0) -> Circuit:
    if n < 2 or depth < 1:
        raise ValueError("QV needs n >= 2 and depth >= 1")
    rng = _rng(seed)
    gates = []
    for _ in range(depth):
        perm = rng.permutation(n)
        for i in range(n // 2):
            a, b = int(perm[2 * i]), int(perm[2 * i + 1])
            gates.append(C.su4(haar_unitary(4, rng), a, b))
    return _circuit("qv", n, gates, depth=depth, seed=seed)


def gen_qft(n: int) -> Circuit:
    """QFT with terminal swaps: ``|x> -> 2**(-n/2) sum_y exp(2 pi i x y / 2**n) |y>``.

    Little-endian throughout, so this is the plain DFT of the amplitude array
    (numpy's ``ifft`` normalisation scaled by ``sqrt(2**n)``).
    """
    if n < 1:
        raise ValueError("QFT needs n >= 1")
    gates = []
    for i in reversed(range(n)):
        gates.append(C.h(i))
        for j in reversed(range(i)):
            gates.append(C.cp(math.pi / 2 ** (i - j), j, i))
    for i in range(n // 2):
        gates.append(C.swap(i, n - 1 - i))
    return _circuit("qft", n, gates)


def qft_gate_count(n: int) -> int:
    return n + n * (n - 1) // 2 + n // 2


_RQC_SINGLE = (GateKind.SQRT_X, GateKind.SQRT_Y, GateKind.T)


def rqc_pairs(n: int, layer: int) -> list[tuple[int, int]]:
    """CZ couplers of a layer: neighbours ``(i, i+1)`` with ``i % 4`` cycling 0, 2, 1, 3."""
    offset = (0, 2, 1, 3)[layer % 4]
    return [(i, i + 1) for i in range(offset, n - 1, 4)]


def rqc_gate_count(n: int, depth: int) -> int:
    return n * depth + sum(len(rqc_pairs(n, layer)) for layer in range(depth))


def gen_rqc(n: int, depth: int = 12, seed: int = 0) -> Circuit:
    """Random circuit: per layer one of sqrt(X), sqrt(Y), T on every qubit
    (never the qubit's previous choice), then a sparse CZ coupler pattern."""
    if n < 2 or depth < 1:
        raise ValueError("RQC needs n >= 2 and depth >= 1")
    rng = _rng(seed)
    prev = [None] * n
    gates = []
    for layer in range(depth):
        for q in range(n):
            options = [k for k in _RQC_SINGLE if k is not prev[q]]
            kind = options[int(rng.integers(len(options)))]
            prev[q] = kind
            gates.append(Gate(kind, (q,)))
        for a, b in rqc_pairs(n, layer):
            gates.append(C.cz(a, b))
    return _circuit("rqc", n, gates, depth=depth, seed=seed)


def grover_iterations(n: int) -> int:
    return int(math.floor(math.pi / 4 * math.sqrt(2**n)))


def gen_grover(n: int, marked: int | None = None, iterations: int = 1) -> Circuit:
    """Grover search for one marked basis state with native multi-controlled Z."""
    if n < 2:
        raise ValueError("Grover needs n >= 2")
    marked = (1 << n) - 1 if marked is None else marked
    if not 0 <= marked < 1 << n:
        raise ValueError(f"marked state {marked} out of range for {n} qubits")
    zeros = [q for q in range(n) if not (marked >> q) & 1]
    everyone = range(n)
    controls, top = tuple(range(n - 1)), n - 1
    gates = [C.h(q) for q in everyone]
    for _ in range(iterations):
        gates += [C.x(q) for q in zeros]
        gates.append(C.mcz(controls, top))
        gates += [C.x(q) for q in zeros]
        gates += [C.h(q) for q in everyone]
        gates += [C.x(q) for q in everyone]
        gates.append(C.mcz(controls, top))
        gates += [C.x(q) for q in everyone]
        gates += [C.h(q) for q in everyone]
    return _circuit("grover", n, gates, marked=marked, iterations=iterations)


def grover_gate_count(n: int, marked: int, iterations: int = 1) -> int:
    zeros = n - bin(marked).count("1")
    return n + iterations * (4 * n + 2 + 2 * zeros)


def gen_ghz(n: int) -> Circuit:
    if n < 1:
        raise ValueError("GHZ needs n >= 1")
    gates = [C.h(0)] + [C.cx(i, i + 1) for i in range(n - 1)]
    return _circuit("ghz", n, gates)


# multi-controlled X without clean ancillas ----------------------------------------

def _vchain(controls, target, dirty) -> list[Gate]:
    """k-controlled X from 4(k-2) Toffolis borrowing k-2 qubits in any state."""
    k = len(controls)
    c, a = controls, dirty[: k - 2]
    down = [C.ccx(c[i + 2], a[i], a[i + 1]) for i in reversed(range(k - 3))]
    up = down[::-1]
    top = C.ccx(c[k - 1], a[k - 3], target)
    bottom = C.ccx(c[0], c[1], a[0])
    return [top, *down, bottom, *up, top, *down, bottom, *up]


def mcx_gates(controls, target, free=()) -> list[Gate]:
    """Decompose a multi-controlled X into X/CX/CCX (plus H/CP when no spare qubit exists).

    ``free`` lists qubits outside the gate that may be borrowed: they are
    used as dirty ancillas and restored. With at least ``k - 2`` of them a
    Toffoli V-chain is used; with at least one, the controls are split in
    two halves around one borrowed qubit; with none, the gate becomes
    ``H . C^k(phase pi) . H`` and the phase is peeled off one control at a
    time, which frees a qubit for the inner multi-controlled X.
    """
    controls = tuple(controls)
    free = tuple(q for q in free if q != target and q not in controls)
    k = len(controls)
    if k == 0:
        return [C.x(target)]
    if k == 1:
        return [C.cx(controls[0], target)]
    if k == 2:
        return [C.ccx(controls[0], controls[1], target)]
    if len(free) >= k - 2:
        return _vchain(controls, target, free)
    if free:
        a = free[0]
        m1 = (k + 1) // 2
        c1, c2 = controls[:m1], controls[m1:]
        first = mcx_gates(c1, a, c2 + (target,) + free[1:])
        second = mcx_gates(c2 + (a,), target, c1 + free[1:])
        return first + second + first + second
    return [C.h(target), *mcphase_gates(math.pi, controls, target), C.h(target)]


def mcphase_gates(theta: float, controls, target, free=()) -> list[Gate]:
    """Phase ``exp(i theta)`` on the all-ones state of ``controls + (target,)``."""
    controls = tuple(controls)
    k = len(controls)
    if k == 0:
        return [C.p(theta, target)]
    if k == 1:
        return [C.cp(theta, controls[0], target)]
    last, rest = controls[-1], controls[:-1]
    flip = mcx_gates(rest, last, (target,) + tuple(free))
    return [
        C.cp(theta / 2, last, target),
        *flip,
        C.cp(-theta / 2, last, target),
        *flip,
        *mcphase_gates(theta / 2, rest, target, (last,) + tuple(free)),
    ]


def gen_qw(n: int, iterations: int = 1) -> Circuit:
    """Coined walk on a cycle of ``2**(n-1)`` sites.

    Qubit 0 is the Hadamard coin, qubits ``1..n-1`` the position register
    (position = index >> 1). Each step: coin flip, increment when the coin is
    1, decrement when it is 0. Increment is the descending cascade of
    multi-controlled X gates; decrement is its inverse (the same cascade in
    ascending order).
    """
    if n < 2 or iterations < 1:
        raise ValueError("QW needs n >= 2 and iterations >= 1")
    coin = 0
    pos = list(range(1, n))
    everyone = set(range(n))

    def cascade(order):
        out = []
        for k in order:
            controls = (coin, *pos[:k])
            spare = sorted(everyone - set(controls) - {pos[k]})
            out += mcx_gates(controls, pos[k], spare)
        return out

    inc = cascade(reversed(range(len(pos))))
    dec = cascade(range(len(pos)))
    gates = []
    for _ in range(iterations):
        gates.append(C.h(coin))
        gates += inc
        gates.append(C.x(coin))
        gates += dec
        gates.append(C.x(coin))
    return _circuit("qw", n, gates, iterations=iterations)


def qw_position_distribution(amplitudes: np.ndarray) -> np.ndarray:
    """Probability per walker site (coin traced out)."""
    p = np.abs(np.asarray(amplitudes)) ** 2
    return p.reshape(-1, 2).sum(axis=1)


@dataclass(frozen=True)
class BenchSpec:
    app: str
    n_qubits: int
    depth: int | None = None
    iterations: int | None = None
    seed: int | None = None
    marked: int | None = None

    def __post_init__(self):
        app = self.app.lower()
        object.__setattr__(self, "app", app)
        if app not in APPS:
            raise ValueError(f"unknown app {self.app!r}; choose from {', '.join(APPS)}")
        if self.n_qubits < _MIN_QUBITS[app]:
            raise ValueError(f"{app} needs at least {_MIN_QUBITS[app]} qubits")


def gen(spec: BenchSpec) -> Circuit:
    app, n = spec.app, spec.n_qubits
    seed = 0 if spec.seed is None else spec.seed
    if app == "qv":
        c = gen_qv(n, spec.depth or 10, seed)
    elif app == "qft":
        c = gen_qft(n)
    elif app == "rqc":
        c = gen_rqc(n, spec.depth or 12, seed)
    elif app == "grover":
        c = gen_grover(n, spec.marked, spec.iterations or 1)
    elif app == "ghz":
        c = gen_ghz(n)
    else:
        c = gen_qw(n, spec.iterations or 1)
    return c.replace(c.gates, spec=dict(vars(spec), seed=seed))
