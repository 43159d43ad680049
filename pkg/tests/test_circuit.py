import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qotph.circuit import (Circuit, CircuitFormatError, GateKind, GateOp, circuit_from_dict,
                           circuit_to_dict, parse_circuit, serialize_circuit, validate)
from qotph.engine import RULES
from qotph.sim import SUPPORTED_KINDS, gate_matrix


def test_parse_simple():
    c = parse_circuit("qubits 3\ncx 0 2")
    assert c == Circuit(3, (GateOp(GateKind.CX, (0, 2)),))


def test_parse_key_update_example_notation():
    c = parse_circuit("qubits 5\ncrz 4 2 0.25")
    assert c == Circuit(5, (GateOp(GateKind.CRZ, (4, 2), 0.25),))


def test_parse_skips_comments_and_blank_lines():
    c = parse_circuit("# header comment\nqubits 2\n\n  # mid\nh 0\ncx 0 1\n")
    assert [g.kind for g in c] == [GateKind.H, GateKind.CX]


@pytest.mark.parametrize(
    "text, fragment, line, column",
    [
        ("qubits 1\nbadgate 0", "unknown gate", 2, 1),
        ("qubits 2\ncx 0", "expects 2 qubit", 2, 5),
        ("qubits 2\nh 0 1", "expects 1 qubit", 2, 5),
        ("qubits 2\nh 2", "out of range", 2, 3),
        ("qubits 2\nrz 0 nan", "non-finite", 2, 6),
        ("qubits 2\nrz 0 inf", "non-finite", 2, 6),
        ("qubits 2\nrz 0 abc", "bad angle", 2, 6),
        ("qubits 3\nccx 1 1 2", "repeated qubit", 2, 5),
        ("h 0", "header", 1, 1),
        ("", "missing", 1, 1),
    ],
)
def test_parse_errors(text, fragment, line, column):
    with pytest.raises(CircuitFormatError) as exc:
        parse_circuit(text)
    assert fragment in str(exc.value)
    assert (exc.value.line, exc.value.column) == (line, column)


def test_serialize_examples():
    assert serialize_circuit(Circuit(2, (GateOp(GateKind.CX, (0, 1)),))) == "qubits 2\ncx 0 1"
    c = Circuit(1, (GateOp(GateKind.RZ, (0,), math.pi / 4),))
    assert serialize_circuit(c) == "qubits 1\nrz 0 0.78539816339744828"
    assert serialize_circuit(Circuit(4)) == "qubits 4"


@pytest.mark.parametrize(
    "circuit, codes",
    [
        (Circuit(2, (GateOp(GateKind.CX, (0, 1)),)), []),
        (Circuit(2, (GateOp(GateKind.CX, (0, 2)),)), ["index-out-of-range"]),
        (Circuit(3, (GateOp(GateKind.CCX, (1, 1, 2)),)), ["duplicate-qubit"]),
        (Circuit(2, (GateOp(GateKind.CX, (0,)),)), ["arity-mismatch"]),
        (Circuit(1, (GateOp(GateKind.RZ, (0,)),)), ["missing-angle"]),
        (Circuit(1, (GateOp(GateKind.RZ, (0,), math.inf),)), ["non-finite-angle"]),
        (Circuit(1, (GateOp(GateKind.H, (0,), 1.0),)), ["unexpected-angle"]),
    ],
)
def test_validate(circuit, codes):
    assert [v.code for v in validate(circuit)] == codes


def test_arity_and_params():
    assert GateKind.CXX.arity == 3
    assert GateKind.CSWAP.arity == 3
    assert GateKind.CRZ.arity == 2 and GateKind.CRZ.n_params == 1
    assert GateKind.T.arity == 1 and GateKind.T.n_params == 0
    assert len(GateKind) == 29


@pytest.mark.parametrize("kind", list(GateKind))
def test_kind_dispatch_cross_check(kind):
    # declared arity matches simulator matrices and the rule table covers every kind
    assert kind in SUPPORTED_KINDS
    m = gate_matrix(kind, 0.3 if kind.n_params else None)
    assert m.shape == (2 ** kind.arity,) * 2
    assert kind in RULES


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 6))
    kinds = [k for k in GateKind if k.arity <= n]
    gates = []
    for _ in range(draw(st.integers(0, 12))):
        kind = draw(st.sampled_from(kinds))
        qubits = draw(st.permutations(range(n)))[: kind.arity]
        theta = None
        if kind.n_params:
            theta = draw(st.floats(allow_nan=False, allow_infinity=False, width=64))
        gates.append(GateOp(kind, tuple(qubits), theta))
    return Circuit(n, tuple(gates))


@given(circuits())
@settings(max_examples=200)
def test_text_roundtrip(c):
    assert validate(c) == []
    assert parse_circuit(serialize_circuit(c)) == c


@given(circuits())
@settings(max_examples=50)
def test_json_roundtrip(c):
    assert circuit_from_dict(circuit_to_dict(c)) == c
