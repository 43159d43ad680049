"""Compare the numba and numpy statevector kernels.

    python benchmarks/bench_kernels.py [--qubits 12 16 20] [--repeat 5]

Each row times one sweep of single-, two- and three-qubit gates over a random
state; both kernels start from the same state and their outputs are compared.
"""
import argparse
import time

import numpy as np

from qotph import _kernels
from qotph.circuit import GateKind, GateOp
from qotph.sim import gate_matrix

SWEEP = [GateOp(GateKind.H, (0,)), GateOp(GateKind.RZ, (1,), 0.3), GateOp(GateKind.CX, (0, 2)),
         GateOp(GateKind.CRY, (3, 1), 1.1), GateOp(GateKind.RZZ, (2, 3), 0.7),
         GateOp(GateKind.CCX, (0, 1, 3))]


def _sweep(kernel, state, n):
    for g in SWEEP:
        qubits = tuple((q * (n - 1)) // 3 for q in g.qubits)  # spread over the register
        kernel(state, gate_matrix(g.kind, g.theta), qubits)
    return state


def _time(kernel, state, n, repeat):
    _sweep(kernel, state.copy(), n)  # compile / warm up
    best = float("inf")
    for _ in range(repeat):
        s = state.copy()
        start = time.perf_counter()
        _sweep(kernel, s, n)
        best = min(best, time.perf_counter() - start)
    return best, _sweep(kernel, state.copy(), n)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--qubits", type=int, nargs="+", default=[12, 16, 20])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _kernels._apply_matrix_jit is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'qubits':>6} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max diff':>9}")
    for n in args.qubits:
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        v /= np.linalg.norm(v)
        t_np, out_np = _time(_kernels.apply_matrix_numpy, v, n, args.repeat)
        t_nb, out_nb = _time(_kernels.apply_matrix_numba, v, n, args.repeat)
        diff = float(np.max(np.abs(out_np - out_nb)))
        print(f"{n:>6} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>8.2f} {diff:>9.1e}")


if __name__ == "__main__":
    main()
