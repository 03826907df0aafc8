"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``SVSIM_DISABLE_NUMBA``. Usage::

    python benchmarks/bench_kernels.py --qubits 16 20 --repeats 5
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from svsim import kernels
from svsim.bench import gen_qft, gen_qv, haar_unitary
from svsim.engine import RunConfig, run
from svsim.transpiler import FusionConfig

qubits, repeats = json.loads(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
mats = {k: haar_unitary(2**k, rng) for k in (1, 2, 3)}
out = []
for n in qubits:
    for k, m in mats.items():
        amps = np.zeros(2**n, complex)
        amps[0] = 1
        targets = tuple(range(1, k + 1))
        apply = {1: lambda: kernels.apply_1q(amps, m, 1),
                 2: lambda: kernels.apply_2q(amps, m, targets),
                 3: lambda: kernels.apply_3q(amps, m, targets)}[k]
        apply()  # warm-up, includes JIT compilation
        t = time.perf_counter()
        for _ in range(repeats):
            apply()
        out.append({"case": f"{k}q kernel", "qubits": n, "seconds": (time.perf_counter() - t) / repeats})
    for name, c in (("qft", gen_qft(n)), ("qv", gen_qv(n, 10))):
        cfg = RunConfig(fusion=FusionConfig(enabled=False), keep_state=False)
        run(c, cfg)
        t = time.perf_counter()
        for _ in range(repeats):
            run(c, cfg)
        out.append({"case": f"{name} circuit", "qubits": n, "seconds": (time.perf_counter() - t) / repeats})
print(json.dumps({"backend": kernels.BACKEND, "rows": out}))
"""


def measure(disable_numba, qubits, repeats):
    env = dict(os.environ)
    if disable_numba:
        env["SVSIM_DISABLE_NUMBA"] = "1"
    else:
        env.pop("SVSIM_DISABLE_NUMBA", None)
    proc = subprocess.run([sys.executable, "-c", WORKER, json.dumps(qubits), str(repeats)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[14, 18])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    fast = measure(False, args.qubits, args.repeats)
    slow = measure(True, args.qubits, args.repeats)
    print(f"{'case':<14}{'qubits':>7}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>9}")
    for a, b in zip(fast["rows"], slow["rows"]):
        print(f"{a['case']:<14}{a['qubits']:>7}{a['seconds']:>12.3e}{b['seconds']:>12.3e}"
              f"{b['seconds'] / a['seconds']:>8.2f}x")


if __name__ == "__main__":
    main()
