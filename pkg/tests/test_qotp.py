import numpy as np
import pytest

from conftest import random_keymap
from qotph.circuit import GateKind, GateOp
from qotph.qotp import (KeyMap, all_keymaps, classical_pre_encode, decryption_layer,
                        encryption_layer, generate_keys, mixing_check, qrng_bits, z_layer)
from qotph.sim import Statevector, apply_gates, init_state, phase_aligned_distance

G = GateKind


def test_generate_keys_deterministic():
    assert generate_keys(2, "pseudo", 5) == generate_keys(2, "pseudo", 5)
    assert generate_keys(2, "qrng", 5) == generate_keys(2, "qrng", 5)
    assert len(generate_keys(1, "pseudo", 0)) == 1
    with pytest.raises(ValueError):
        generate_keys(0)
    with pytest.raises(ValueError):
        generate_keys(2, "dice")


def test_qrng_bits_are_fair():
    bits = qrng_bits(10**4, seed=123)
    # 3 sigma binomial band for 1e4 fair coins is +-0.015
    assert 0.47 <= sum(bits) / len(bits) <= 0.53


def test_encryption_layer_examples():
    assert encryption_layer(KeyMap.zeros(3)) == []
    assert encryption_layer(KeyMap(((1, 1),))) == [GateOp(G.Z, (0,)), GateOp(G.X, (0,))]
    assert encryption_layer(KeyMap(((1, 0), (0, 1)))) == [GateOp(G.X, (0,)), GateOp(G.Z, (1,))]


def test_decryption_layer_examples():
    assert decryption_layer(KeyMap(((1, 0),))) == [GateOp(G.X, (0,))]
    assert decryption_layer(KeyMap(((0, 0),))) == []
    assert decryption_layer(KeyMap(((1, 1),))) == [GateOp(G.X, (0,)), GateOp(G.Z, (0,))]


def _random_state(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return Statevector(n, v / np.linalg.norm(v))


def test_encrypt_then_decrypt_is_identity(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        sv = _random_state(n, rng)
        k = random_keymap(n, rng)
        out = apply_gates(sv.copy(), encryption_layer(k) + decryption_layer(k))
        assert phase_aligned_distance(out, sv) <= 1e-12


def test_classical_pre_encode_examples():
    assert classical_pre_encode([1, 0, 1], KeyMap(((1, 0), (0, 1), (1, 1)))) == [0, 0, 0]
    assert classical_pre_encode([1, 0, 1], KeyMap(((0, 1), (0, 0), (0, 1)))) == [1, 0, 1]
    with pytest.raises(ValueError):
        classical_pre_encode([1, 0], KeyMap.zeros(3))


def test_pre_encode_matches_in_circuit_encryption(rng):
    for _ in range(30):
        n = int(rng.integers(1, 6))
        bits = rng.integers(0, 2, n).tolist()
        k = random_keymap(n, rng)
        pre = apply_gates(init_state(classical_pre_encode(bits, k)), z_layer(k))
        full = apply_gates(init_state(bits), encryption_layer(k))
        assert phase_aligned_distance(pre, full) <= 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_mixing_check(n):
    assert mixing_check(n) <= 1e-12


def test_mixing_single_probes():
    plus = apply_gates(init_state([0]), [GateOp(G.H, (0,))])
    assert mixing_check(1, [init_state([0])]) <= 1e-12
    assert mixing_check(1, [plus]) <= 1e-12
    bell = apply_gates(init_state([0, 0]), [GateOp(G.H, (0,)), GateOp(G.CX, (0, 1))])
    assert mixing_check(2, [bell]) <= 1e-12


def test_mixing_check_rejects_large_n():
    with pytest.raises(ValueError):
        mixing_check(3)


def test_unevaluated_ciphertext_outcomes_uniform():
    for n in (1, 2, 3):
        for bits in ([0] * n, [1] * n, [i % 2 for i in range(n)]):
            avg = np.zeros(2**n)
            keys = list(all_keymaps(n))
            for k in keys:
                sv = apply_gates(init_state(bits), encryption_layer(k))
                avg += np.abs(sv.amps) ** 2
            np.testing.assert_allclose(avg / len(keys), 1 / 2**n, atol=1e-12)


def test_keymap_json_shape():
    k = KeyMap(((1, 1), (0, 1)))
    assert k.to_dict() == {"0": [1, 1], "1": [0, 1]}
    assert KeyMap.from_json(k.to_json()) == k
    with pytest.raises(ValueError):
        KeyMap.from_dict({"0": [0, 0], "2": [1, 1]})
    with pytest.raises(ValueError):
        KeyMap(((2, 0),))
