"""
Quantum one-time pad: per-qubit Pauli keys, the encryption and decryption
layers, classical pre-encoding of the X part, and the maximal-mixing check.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .circuit import Circuit, GateKind, GateOp
from .sim import Statevector, apply_gates, init_state, run_circuit, sample_counts


class KeyPair(NamedTuple):
    a: int  # X-key
    b: int  # Z-key


@dataclass(frozen=True)
class KeyMap:
    pairs: tuple[KeyPair, ...]

    def __post_init__(self):
        pairs = tuple(KeyPair(int(a), int(b)) for a, b in self.pairs)
        for p in pairs:
            if p.a not in (0, 1) or p.b not in (0, 1):
                raise ValueError(f"key bits must be 0/1, got {p}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def zeros(cls, n: int) -> "KeyMap":
        return cls(tuple(KeyPair(0, 0) for _ in range(n)))

    @classmethod
    def from_dict(cls, d: dict) -> "KeyMap":
        by_index = {int(q): tuple(p) for q, p in d.items()}
        if sorted(by_index) != list(range(len(by_index))):
            raise ValueError(f"key map qubits must be 0..n-1, got {sorted(by_index)}")
        return cls(tuple(by_index[i] for i in range(len(by_index))))

    @classmethod
    def from_json(cls, text: str) -> "KeyMap":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, list[int]]:
        return {str(i): [p.a, p.b] for i, p in enumerate(self.pairs)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, q: int) -> KeyPair:
        return self.pairs[q]

    def __iter__(self):
        return iter(self.pairs)

    @property
    def x_bits(self) -> list[int]:
        return [p.a for p in self.pairs]

    @property
    def z_bits(self) -> list[int]:
        return [p.b for p in self.pairs]

    def restrict(self, qubits) -> tuple[KeyPair, ...]:
        try:
            return tuple(self.pairs[q] for q in qubits)
        except IndexError:
            raise KeyError(f"no key for some qubit in {tuple(qubits)}") from None

    def updated(self, qubits, new_pairs) -> "KeyMap":
        pairs = list(self.pairs)
        for q, p in zip(qubits, new_pairs):
            pairs[q] = KeyPair(*p)
        return KeyMap(tuple(pairs))


def all_keymaps(n: int):
    """Every one of the 4**n key assignments on ``n`` qubits."""
    for bits in itertools.product((0, 1), repeat=2 * n):
        yield KeyMap(tuple(zip(bits[0::2], bits[1::2])))


_QRNG_CIRCUIT = Circuit(1, (GateOp(GateKind.H, (0,)),))


def qrng_bits(count: int, seed=None) -> list[int]:
    """Fair bits from measuring H|0>, one simulated shot per bit."""
    rng = np.random.default_rng(seed)
    plus = run_circuit(_QRNG_CIRCUIT, [0])
    return [int(next(iter(sample_counts(plus, 1, rng)))) for _ in range(count)]


def generate_keys(n: int, source: str = "pseudo", seed=None) -> KeyMap:
    """2n key bits from a seeded PRNG (``pseudo``) or the simulated QRNG (``qrng``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if source == "pseudo":
        bits = np.random.default_rng(seed).integers(0, 2, size=2 * n).tolist()
    elif source in ("qrng", "simulated-qrng"):
        bits = qrng_bits(2 * n, seed)
    else:
        raise ValueError(f"unknown key source {source!r}")
    return KeyMap(tuple(zip(bits[0::2], bits[1::2])))


def encryption_layer(k: KeyMap) -> list[GateOp]:
    # operator X^a Z^b: Z executes first
    out = []
    for q, p in enumerate(k):
        if p.b:
            out.append(GateOp(GateKind.Z, (q,)))
        if p.a:
            out.append(GateOp(GateKind.X, (q,)))
    return out


def decryption_layer(k: KeyMap) -> list[GateOp]:
    # operator Z^b X^a: X executes first
    out = []
    for q, p in enumerate(k):
        if p.a:
            out.append(GateOp(GateKind.X, (q,)))
        if p.b:
            out.append(GateOp(GateKind.Z, (q,)))
    return out


def z_layer(k: KeyMap) -> list[GateOp]:
    return [GateOp(GateKind.Z, (q,)) for q, p in enumerate(k) if p.b]


def classical_pre_encode(bits, k: KeyMap) -> list[int]:
    """Fold the X part of the pad into the classical input; Z stays in-circuit."""
    bits = [int(b) for b in bits]
    if len(bits) != len(k):
        raise ValueError(f"{len(bits)} bits for a {len(k)}-qubit key")
    return [b ^ p.a for b, p in zip(bits, k)]


def encrypt_state(sv: Statevector, k: KeyMap) -> Statevector:
    return apply_gates(sv.copy(), encryption_layer(k))


def mixing_probes(n: int) -> list[Statevector]:
    """Basis states, H- and HT-prepared products, and (n=2) a Bell state."""
    probes = []
    for bits in itertools.product((0, 1), repeat=n):
        probes.append(init_state(bits))
        for prep in ([GateKind.H], [GateKind.H, GateKind.T]):
            sv = init_state(bits)
            apply_gates(sv, [GateOp(kind, (q,)) for q in range(n) for kind in prep])
            probes.append(sv)
    if n == 2:
        bell = init_state([0, 0])
        apply_gates(bell, [GateOp(GateKind.H, (0,)), GateOp(GateKind.CX, (0, 1))])
        probes.append(bell)
    return probes


def key_averaged_density(sv: Statevector) -> np.ndarray:
    rho = np.zeros((sv.amps.size, sv.amps.size), dtype=complex)
    keys = list(all_keymaps(sv.n_qubits))
    for k in keys:
        enc = encrypt_state(sv, k).amps
        rho += np.outer(enc, enc.conj())
    return rho / len(keys)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(rho - sigma)).sum())


def mixing_check(n: int, probes: list[Statevector] | None = None) -> float:
    """Max trace distance between key-averaged ciphertexts and I/2^n."""
    if n not in (1, 2):
        raise ValueError("mixing check is exhaustive and limited to n <= 2")
    target = np.eye(1 << n) / (1 << n)
    probes = mixing_probes(n) if probes is None else probes
    return max(trace_distance(key_averaged_density(p), target) for p in probes)
