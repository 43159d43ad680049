"""
Dense statevector simulation over the full gate set.

Basis index convention: index = sum_i b_i * 2**i, qubit 0 is the least
significant bit. Bitstrings are written with qubit 0 leftmost.
"""
from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from . import _kernels
from .circuit import Circuit, CircuitValidationError, GateKind, GateOp, validate_gate

DENSE_MAX_QUBITS = 4

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.diag([1, 1j])
_T = np.diag([1, cmath.exp(1j * math.pi / 4)])
_SQRTX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_PAULI = {"x": _X, "y": _Y, "z": _Z}


def _rot(pauli: np.ndarray, theta: float) -> np.ndarray:
    # exp(-i theta/2 P) for any P with P @ P = I
    return math.cos(theta / 2) * np.eye(pauli.shape[0]) - 1j * math.sin(theta / 2) * pauli


def _controlled(u: np.ndarray) -> np.ndarray:
    d = u.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[d:, d:] = u
    return out


_FIXED = {
    GateKind.X: _X,
    GateKind.Y: _Y,
    GateKind.Z: _Z,
    GateKind.H: _H,
    GateKind.S: _S,
    GateKind.SDG: _S.conj().T,
    GateKind.T: _T,
    GateKind.TDG: _T.conj().T,
    GateKind.SQRTX: _SQRTX,
    GateKind.CX: _controlled(_X),
    GateKind.CY: _controlled(_Y),
    GateKind.CZ: _controlled(_Z),
    GateKind.CH: _controlled(_H),
    GateKind.CS: _controlled(_S),
    GateKind.CT: _controlled(_T),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    GateKind.CXX: _controlled(np.kron(_X, _X)),
    GateKind.CCX: _controlled(_controlled(_X)),
    GateKind.CCZ: _controlled(_controlled(_Z)),
}
_FIXED[GateKind.CSWAP] = _controlled(_FIXED[GateKind.SWAP])

_ROTATIONS = {
    GateKind.RX: lambda t: _rot(_X, t),
    GateKind.RY: lambda t: _rot(_Y, t),
    GateKind.RZ: lambda t: _rot(_Z, t),
    GateKind.CRX: lambda t: _controlled(_rot(_X, t)),
    GateKind.CRY: lambda t: _controlled(_rot(_Y, t)),
    GateKind.CRZ: lambda t: _controlled(_rot(_Z, t)),
    GateKind.RXX: lambda t: _rot(np.kron(_X, _X), t),
    GateKind.RYY: lambda t: _rot(np.kron(_Y, _Y), t),
    GateKind.RZZ: lambda t: _rot(np.kron(_Z, _Z), t),
}

SUPPORTED_KINDS = frozenset(_FIXED) | frozenset(_ROTATIONS)


def gate_matrix(kind: GateKind, theta: float | None = None) -> np.ndarray:
    """Unitary of ``kind`` in local ordering (first listed qubit = most significant)."""
    if kind in _ROTATIONS:
        return _ROTATIONS[kind](theta)
    return _FIXED[kind]


class Statevector:
    __slots__ = ("n_qubits", "amps")

    def __init__(self, n_qubits: int, amps: np.ndarray):
        if amps.shape != (1 << n_qubits,):
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got {amps.shape}")
        self.n_qubits = n_qubits
        self.amps = amps

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amps.copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def __repr__(self):
        return f"Statevector(n_qubits={self.n_qubits})"


def bits_to_index(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def index_to_bitstring(index: int, n: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(n))


def bitstring_to_bits(s: str) -> list[int]:
    if set(s) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {s!r}")
    return [int(ch) for ch in s]


def init_state(bits) -> Statevector:
    bits = [int(b) for b in bits]
    if not bits:
        raise ValueError("need at least one qubit")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be 0/1, got {bits}")
    amps = np.zeros(1 << len(bits), dtype=np.complex128)
    amps[bits_to_index(bits)] = 1.0
    return Statevector(len(bits), amps)


def apply_gate(sv: Statevector, g: GateOp) -> Statevector:
    """Apply ``g`` in place and return ``sv``."""
    violations = validate_gate(g, sv.n_qubits)
    if violations:
        raise CircuitValidationError(violations)
    _kernels.apply_matrix(sv.amps, gate_matrix(g.kind, g.theta), g.qubits)
    return sv


def apply_gates(sv: Statevector, gates) -> Statevector:
    for g in gates:
        apply_gate(sv, g)
    return sv


def run_circuit(c: Circuit, bits) -> Statevector:
    sv = init_state(bits)
    if sv.n_qubits != c.n_qubits:
        raise ValueError(f"{len(bits)} input bits for a {c.n_qubits}-qubit circuit")
    return apply_gates(sv, c.gates)


def probabilities(sv: Statevector) -> np.ndarray:
    p = sv.amps.real ** 2 + sv.amps.imag ** 2
    return p


def distribution(sv: Statevector, cutoff: float = 1e-15) -> dict[str, float]:
    p = probabilities(sv)
    idx = np.flatnonzero(p >= cutoff)
    return {index_to_bitstring(int(i), sv.n_qubits): float(p[i]) for i in idx}


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _counts_from_indices(indices: np.ndarray, values: np.ndarray, n: int) -> dict[str, int]:
    if len(indices) == 0:
        return {}
    bits = (indices[:, None] >> np.arange(n)) & 1
    chars = np.where(bits == 1, ord("1"), ord("0")).astype(np.uint8)
    keys = chars.view(f"S{n}").ravel()
    return {k.decode(): int(v) for k, v in zip(keys, values)}


def sample_counts(sv: Statevector, shots: int, seed=None) -> dict[str, int]:
    """Multinomial sample of ``shots`` measurements of every qubit."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = probabilities(sv)
    p = p / p.sum()
    hist = _as_rng(seed).multinomial(shots, p)
    idx = np.flatnonzero(hist)
    return _counts_from_indices(idx, hist[idx], sv.n_qubits)


def _embed(mat: np.ndarray, qubits, n: int) -> np.ndarray:
    # U[i, j] = mat[loc(i), loc(j)] when the bits outside `qubits` agree
    k = len(qubits)
    idx = np.arange(1 << n)
    loc = np.zeros_like(idx)
    mask = 0
    for pos, q in enumerate(qubits):
        loc |= ((idx >> q) & 1) << (k - 1 - pos)
        mask |= 1 << q
    rest = idx & ~mask
    same = rest[:, None] == rest[None, :]
    return np.where(same, mat[loc[:, None], loc[None, :]], 0)


def dense_unitary(c: Circuit) -> np.ndarray:
    """Full 2^n x 2^n unitary of ``c`` by explicit embedding (small n only)."""
    if c.n_qubits > DENSE_MAX_QUBITS:
        raise ValueError(f"dense_unitary limited to {DENSE_MAX_QUBITS} qubits")
    u = np.eye(1 << c.n_qubits, dtype=complex)
    for g in c.gates:
        violations = validate_gate(g, c.n_qubits)
        if violations:
            raise CircuitValidationError(violations)
        u = _embed(gate_matrix(g.kind, g.theta), g.qubits, c.n_qubits) @ u
    return u


def phase_aligned_distance(a, b) -> float:
    """max_i |a_i - gamma b_i| with gamma aligning a to b at b's largest entry.

    Works for statevectors and for matrices (flattened).
    """
    a = np.ravel(a.amps if isinstance(a, Statevector) else a)
    b = np.ravel(b.amps if isinstance(b, Statevector) else b)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    m = int(np.argmax(np.abs(b)))
    if abs(b[m]) == 0:
        raise ValueError("zero vector")
    ratio = a[m] / b[m]
    gamma = ratio / abs(ratio) if abs(ratio) > 0 else 1.0
    return float(np.max(np.abs(a - gamma * b)))


@lru_cache(maxsize=None)
def _basis_action(kind: GateKind, theta) -> tuple[np.ndarray, np.ndarray] | None:
    mat = gate_matrix(kind, theta)
    nz = np.abs(mat) > 1e-12
    if not (nz.sum(axis=0) == 1).all():
        return None
    rows = nz.argmax(axis=0)
    return rows, mat[rows, np.arange(mat.shape[1])]


def run_basis_circuit(c: Circuit, bits) -> tuple[list[int], complex]:
    """Run a permutation-phase circuit (X, Z, SWAP, CX, ...) on a basis state.

    Tracks a single basis index and its phase, so cost is independent of 2^n.
    Raises ValueError on a gate that creates superposition.
    """
    bits = [int(b) for b in bits]
    if len(bits) != c.n_qubits:
        raise ValueError("bit count does not match circuit width")
    phase = 1 + 0j
    for g in c.gates:
        action = _basis_action(g.kind, g.theta)
        if action is None:
            raise ValueError(f"{g.kind.value} is not a basis-permuting gate")
        rows, vals = action
        k = len(g.qubits)
        col = 0
        for q in g.qubits:
            col = (col << 1) | bits[q]
        row = int(rows[col])
        phase *= complex(vals[col])
        for pos, q in enumerate(g.qubits):
            bits[q] = (row >> (k - 1 - pos)) & 1
    return bits, phase
