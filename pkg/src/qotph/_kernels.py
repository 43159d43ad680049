"""
Statevector gate kernels.

Two interchangeable implementations of ``apply_matrix(state, mat, qubits)``:
a numba-compiled strided loop and a pure-numpy tensordot path. The numba path
is used when numba imports and ``QOTPH_NO_NUMBA`` is unset (or ``0``).

Local matrix ordering: ``qubits[0]`` is the most significant bit of the row
and column index, so ``CX`` with ``qubits=(c, t)`` uses the textbook matrix.
"""
import os

import numpy as np

_DISABLED = os.environ.get("QOTPH_NO_NUMBA", "0") not in ("", "0")

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def apply_matrix_numpy(state: np.ndarray, mat: np.ndarray, qubits) -> np.ndarray:
    n = state.shape[0].bit_length() - 1
    k = len(qubits)
    axes = [n - 1 - q for q in qubits]
    psi = state.reshape((2,) * n)
    out = np.tensordot(mat.reshape((2,) * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    state[:] = out.reshape(-1)
    return state


def _apply_matrix_loop(state, mat, qubits):
    k = qubits.shape[0]
    dim = 1 << k
    sorted_q = np.sort(qubits)
    offsets = np.zeros(dim, np.int64)
    for local in range(dim):
        off = 0
        for i in range(k):
            if (local >> (k - 1 - i)) & 1:
                off |= 1 << qubits[i]
        offsets[local] = off
    buf = np.empty(dim, state.dtype)
    for g in range(state.shape[0] >> k):
        base = g
        for q in sorted_q:
            low = base & ((1 << q) - 1)
            base = ((base >> q) << (q + 1)) | low
        for r in range(dim):
            buf[r] = state[base + offsets[r]]
        for r in range(dim):
            acc = 0j
            for c in range(dim):
                acc += mat[r, c] * buf[c]
            state[base + offsets[r]] = acc
    return state


def _apply_diagonal_loop(state, diag, qubits):
    k = qubits.shape[0]
    for i in range(state.shape[0]):
        local = 0
        for j in range(k):
            local = (local << 1) | ((i >> qubits[j]) & 1)
        state[i] *= diag[local]
    return state


if njit is not None:
    _apply_matrix_jit = njit(cache=True, nogil=True)(_apply_matrix_loop)
    _apply_diagonal_jit = njit(cache=True, nogil=True)(_apply_diagonal_loop)
else:  # pragma: no cover
    _apply_matrix_jit = _apply_diagonal_jit = None


def apply_matrix_numba(state: np.ndarray, mat: np.ndarray, qubits) -> np.ndarray:
    q = np.asarray(qubits, dtype=np.int64)
    if np.count_nonzero(mat - np.diag(np.diag(mat))) == 0:
        return _apply_diagonal_jit(state, np.ascontiguousarray(np.diag(mat)), q)
    return _apply_matrix_jit(state, np.ascontiguousarray(mat), q)


NUMBA_ENABLED = _apply_matrix_jit is not None and not _DISABLED
BACKEND = "numba" if NUMBA_ENABLED else "numpy"
apply_matrix = apply_matrix_numba if NUMBA_ENABLED else apply_matrix_numpy
