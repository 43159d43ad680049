"""
End-to-end protocol runs: in-circuit decryption (algorithm 1), encrypted output
with local decryption (algorithm 2), swap obfuscation, and fidelity metrics.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, GateKind, GateOp, check, parse_circuit, serialize_circuit
from .engine import evaluate_homomorphic
from .qotp import (KeyMap, classical_pre_encode, decryption_layer, encryption_layer,
                   generate_keys, z_layer)
from .sim import (Statevector, apply_gates, bitstring_to_bits, distribution, init_state,
                  run_basis_circuit, run_circuit, sample_counts)

# local decryption simulates the full register up to this width, then tracks basis states
DENSE_DECRYPT_MAX_QUBITS = 12


@dataclass(frozen=True)
class SwapRecord:
    pairs: tuple[tuple[int, int], ...]
    permutation: tuple[int, ...]  # permutation[position] = logical qubit measured there

    @classmethod
    def from_pairs(cls, pairs, n: int) -> "SwapRecord":
        perm = list(range(n))
        for p, q in pairs:
            perm[p], perm[q] = perm[q], perm[p]
        return cls(tuple((int(p), int(q)) for p, q in pairs), tuple(perm))

    @classmethod
    def identity(cls, n: int) -> "SwapRecord":
        return cls((), tuple(range(n)))

    def inverse_gates(self) -> list[GateOp]:
        return [GateOp(GateKind.SWAP, pair) for pair in reversed(self.pairs)]

    def to_dict(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "permutation": list(self.permutation)}

    @classmethod
    def from_dict(cls, d: dict, n: int) -> "SwapRecord":
        rec = cls.from_pairs([tuple(p) for p in d["pairs"]], n)
        if "permutation" in d and tuple(d["permutation"]) != rec.permutation:
            raise ValueError("swap permutation does not match its pairs")
        return rec


@dataclass
class EncryptedRunResult:
    encrypted_counts: dict[str, float]
    keys: KeyMap
    swaps: SwapRecord
    circuit_sent: Circuit
    initial_keys: KeyMap | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "encrypted_counts": dict(sorted(self.encrypted_counts.items())),
            "keys": self.keys.to_dict(),
            "swaps": self.swaps.to_dict(),
            "circuit_sent": serialize_circuit(self.circuit_sent),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "EncryptedRunResult":
        circuit = parse_circuit(d["circuit_sent"])
        keys = KeyMap.from_dict(d["keys"])
        if len(keys) != circuit.n_qubits:
            raise ValueError(f"{len(keys)} keys for a {circuit.n_qubits}-qubit circuit")
        return cls(d["encrypted_counts"], keys, SwapRecord.from_dict(d["swaps"], circuit.n_qubits),
                   circuit)

    @classmethod
    def from_json(cls, text: str) -> "EncryptedRunResult":
        return cls.from_dict(json.loads(text))


def _streams(seed):
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    keys_ss, sample_ss, swap_ss = root.spawn(3)
    return keys_ss, np.random.default_rng(sample_ss), np.random.default_rng(swap_ss)


def _prepare(bits, c: Circuit, keys: KeyMap | None, seed, key_source: str):
    bits = [int(b) for b in bits]
    check(c)
    if len(bits) != c.n_qubits:
        raise ValueError(f"{len(bits)} input bits for a {c.n_qubits}-qubit circuit")
    keys_ss, sample_rng, swap_rng = _streams(seed)
    if keys is None:
        keys = generate_keys(c.n_qubits, key_source, keys_ss)
    elif len(keys) != c.n_qubits:
        raise ValueError(f"{len(keys)} keys for a {c.n_qubits}-qubit circuit")
    return bits, keys, sample_rng, swap_rng


def algorithm1_state(bits, c: Circuit, keys: KeyMap) -> tuple[Statevector, KeyMap]:
    """Pre-measurement state of algorithm 1 and the final keys."""
    sv = init_state(bits)
    apply_gates(sv, encryption_layer(keys))
    enc_eval, final = evaluate_homomorphic(c, keys)
    apply_gates(sv, enc_eval)
    apply_gates(sv, decryption_layer(final))
    return sv, final


def run_algorithm1(bits, c: Circuit, shots: int, seed=None, keys: KeyMap | None = None,
                   key_source: str = "pseudo") -> dict[str, int]:
    """Encrypt, evaluate homomorphically, decrypt in-circuit, then sample."""
    bits, keys, sample_rng, _ = _prepare(bits, c, keys, seed, key_source)
    sv, _ = algorithm1_state(bits, c, keys)
    return sample_counts(sv, shots, sample_rng)


def algorithm1_distribution(bits, c: Circuit, keys: KeyMap) -> dict[str, float]:
    return distribution(algorithm1_state(bits, c, keys)[0])


def apply_swap_obfuscation(c: Circuit, count: int | None, rng) -> tuple[Circuit, SwapRecord]:
    """Append ``count`` random SWAPs after all computation gates."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n = c.n_qubits
    if count is None:
        count = int(rng.integers(1, max(1, n // 2) + 1)) if n >= 2 else 0
    if count and n < 2:
        raise ValueError("swap obfuscation needs at least two qubits")
    pairs = [tuple(int(q) for q in rng.choice(n, size=2, replace=False)) for _ in range(count)]
    record = SwapRecord.from_pairs(pairs, n)
    return c.extended(GateOp(GateKind.SWAP, p) for p in pairs), record


def build_sent_circuit(bits, c: Circuit, keys: KeyMap, pre_encode: bool = False):
    """Circuit an untrusted backend runs from |0...0>: state prep, pad, evaluation.

    With ``pre_encode`` the X part of the pad is folded into the prepared bits,
    so neither the plaintext bits nor the X-keys appear separately.
    """
    enc_eval, final = evaluate_homomorphic(c, keys)
    if pre_encode:
        prep_bits = classical_pre_encode(bits, keys)
        pad = z_layer(keys)
    else:
        prep_bits = bits
        pad = encryption_layer(keys)
    prep = [GateOp(GateKind.X, (q,)) for q, b in enumerate(prep_bits) if b]
    return Circuit(c.n_qubits, tuple(prep + pad + enc_eval)), final


def run_algorithm2(bits, c: Circuit, shots: int | None, seed=None, use_swaps: bool = False,
                   use_pre_encode: bool = False, keys: KeyMap | None = None,
                   swap_count: int | None = None, key_source: str = "pseudo") -> EncryptedRunResult:
    """Evaluate without the decryption layer; return encrypted statistics.

    ``shots=None`` returns the exact encrypted distribution instead of counts.
    """
    bits, keys, sample_rng, swap_rng = _prepare(bits, c, keys, seed, key_source)
    sent, final = build_sent_circuit(bits, c, keys, use_pre_encode)
    swaps = SwapRecord.identity(c.n_qubits)
    if use_swaps:
        sent, swaps = apply_swap_obfuscation(sent, swap_count, swap_rng)
    sv = run_circuit(sent, [0] * c.n_qubits)
    if shots is None:
        counts = distribution(sv)
    else:
        counts = sample_counts(sv, shots, sample_rng)
    return EncryptedRunResult(counts, final, swaps, sent, initial_keys=keys)


def decryption_circuit(x: str, r: EncryptedRunResult) -> Circuit:
    """Prepare |x>, undo the recorded swaps, then apply Z^b X^a per qubit."""
    n = r.circuit_sent.n_qubits
    prep = [GateOp(GateKind.X, (q,)) for q, ch in enumerate(x) if ch == "1"]
    return Circuit(n, tuple(prep + r.swaps.inverse_gates() + decryption_layer(r.keys)))


def _measure_once(c: Circuit) -> str:
    if c.n_qubits <= DENSE_DECRYPT_MAX_QUBITS:
        out = distribution(run_circuit(c, [0] * c.n_qubits))
        if len(out) != 1:
            raise RuntimeError("decryption circuit is not deterministic on a basis state")
        return next(iter(out))
    bits, _ = run_basis_circuit(c, [0] * c.n_qubits)
    return "".join(map(str, bits))


def local_decrypt(r: EncryptedRunResult, mode: str = "circuit") -> dict:
    """Decrypt encrypted outcomes; weights (counts or probabilities) are carried over."""
    n = r.circuit_sent.n_qubits
    if len(r.keys) != n or len(r.swaps.permutation) != n:
        raise ValueError("keys/swaps do not match the circuit width")
    out: dict[str, float] = {}
    a = r.keys.x_bits
    for x in sorted(r.encrypted_counts):
        weight = r.encrypted_counts[x]
        if not weight:
            continue
        if len(x) != n:
            raise ValueError(f"bitstring {x!r} does not have {n} bits")
        if mode == "circuit":
            y = _measure_once(decryption_circuit(x, r))
        elif mode == "classical":
            xb = bitstring_to_bits(x)
            logical = [0] * n
            for pos, label in enumerate(r.swaps.permutation):
                logical[label] = xb[pos]
            y = "".join(str(v ^ k) for v, k in zip(logical, a))
        else:
            raise ValueError(f"unknown decryption mode {mode!r}")
        out[y] = out.get(y, 0) + weight
    return out


def _normalize(p: dict) -> dict[str, float]:
    total = float(sum(p.values()))
    if not p or total <= 0:
        raise ValueError("empty distribution")
    if any(v < 0 for v in p.values()):
        raise ValueError("negative weight in distribution")
    return {k: v / total for k, v in p.items()}


def hellinger_distance(p: dict, q: dict) -> float:
    """sqrt(sum (sqrt p_i - sqrt q_i)^2) / sqrt(2) over the union of supports."""
    p, q = _normalize(p), _normalize(q)
    acc = 0.0
    for key in sorted(p.keys() | q.keys()):
        acc += (math.sqrt(p.get(key, 0.0)) - math.sqrt(q.get(key, 0.0))) ** 2
    return min(1.0, math.sqrt(acc) / math.sqrt(2))


def fidelity(p: dict, q: dict) -> float:
    """(1 - H^2)^2, i.e. the squared Bhattacharyya overlap."""
    h = hellinger_distance(p, q)
    return (1.0 - h * h) ** 2
