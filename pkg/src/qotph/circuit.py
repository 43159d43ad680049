"""
Gate-level circuit IR shared by plaintext, encrypted and decryption circuits.

Contains:
    - GateKind: the supported gate set, with arity and parameter count
    - GateOp: one gate application (controls first, then targets)
    - Circuit: qubit count plus gates in temporal order
    - parse_circuit / serialize_circuit: the line-based text format
    - validate: structural checks returning violations as data
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum


class GateKind(Enum):
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    SQRTX = "sqrtx"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    CY = "cy"
    CZ = "cz"
    CH = "ch"
    CS = "cs"
    CT = "ct"
    CRX = "crx"
    CRY = "cry"
    CRZ = "crz"
    RXX = "rxx"
    RYY = "ryy"
    RZZ = "rzz"
    CXX = "cxx"  # one control, two targets
    SWAP = "swap"
    CCX = "ccx"
    CCZ = "ccz"
    CSWAP = "cswap"  # Fredkin

    @property
    def arity(self) -> int:
        return _ARITY[self]

    @property
    def n_params(self) -> int:
        return 1 if self in PARAMETERIZED else 0

    @classmethod
    def from_name(cls, name: str) -> "GateKind":
        try:
            return cls(name)
        except ValueError:
            raise KeyError(name) from None


PARAMETERIZED = frozenset({
    GateKind.RX, GateKind.RY, GateKind.RZ,
    GateKind.CRX, GateKind.CRY, GateKind.CRZ,
    GateKind.RXX, GateKind.RYY, GateKind.RZZ,
})

_TWO = {
    GateKind.CX, GateKind.CY, GateKind.CZ, GateKind.CH, GateKind.CS, GateKind.CT,
    GateKind.CRX, GateKind.CRY, GateKind.CRZ,
    GateKind.RXX, GateKind.RYY, GateKind.RZZ, GateKind.SWAP,
}
_THREE = {GateKind.CXX, GateKind.CCX, GateKind.CCZ, GateKind.CSWAP}
_ARITY = {k: 3 if k in _THREE else 2 if k in _TWO else 1 for k in GateKind}


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    qubits: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.theta is not None:
            object.__setattr__(self, "theta", float(self.theta))

    def __str__(self):
        parts = [self.kind.value, *map(str, self.qubits)]
        if self.theta is not None:
            parts.append(format_angle(self.theta))
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[GateOp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def extended(self, gates) -> "Circuit":
        return Circuit(self.n_qubits, self.gates + tuple(gates))


@dataclass(frozen=True)
class Violation:
    gate_index: int
    code: str
    message: str


class CircuitFormatError(ValueError):
    """Malformed circuit text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CircuitValidationError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        msg = "; ".join(f"gate {v.gate_index}: {v.message}" for v in violations)
        super().__init__(msg)


def format_angle(theta: float) -> str:
    return format(theta, ".17g")


def validate_gate(g: GateOp, n_qubits: int, index: int = 0) -> list[Violation]:
    out = []
    if len(g.qubits) != g.kind.arity:
        out.append(Violation(index, "arity-mismatch",
                             f"{g.kind.value} takes {g.kind.arity} qubits, got {len(g.qubits)}"))
    for q in g.qubits:
        if not 0 <= q < n_qubits:
            out.append(Violation(index, "index-out-of-range",
                                 f"qubit {q} outside [0, {n_qubits})"))
    if len(set(g.qubits)) != len(g.qubits):
        out.append(Violation(index, "duplicate-qubit", f"repeated qubit in {g.qubits}"))
    if g.kind.n_params and g.theta is None:
        out.append(Violation(index, "missing-angle", f"{g.kind.value} needs an angle"))
    elif not g.kind.n_params and g.theta is not None:
        out.append(Violation(index, "unexpected-angle", f"{g.kind.value} takes no angle"))
    elif g.theta is not None and not math.isfinite(g.theta):
        out.append(Violation(index, "non-finite-angle", f"angle {g.theta}"))
    return out


def validate(c: Circuit) -> list[Violation]:
    """Return every structural violation in ``c``; empty means valid."""
    if c.n_qubits < 1:
        return [Violation(-1, "empty-register", "n_qubits must be positive")]
    out = []
    for i, g in enumerate(c.gates):
        out.extend(validate_gate(g, c.n_qubits, i))
    return out


def check(c: Circuit) -> Circuit:
    violations = validate(c)
    if violations:
        raise CircuitValidationError(violations)
    return c


def _column_of(raw: str, token_index: int) -> int:
    pos = 0
    for i, tok in enumerate(raw.split()):
        pos = raw.index(tok, pos)
        if i == token_index:
            return pos + 1
        pos += len(tok)
    return len(raw) + 1


def parse_circuit(text: str) -> Circuit:
    """Parse the text format: ``qubits <n>`` header, then one gate per line."""
    n_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if n_qubits is None:
            if tokens[0] != "qubits" or len(tokens) != 2:
                raise CircuitFormatError("expected header 'qubits <n>'", lineno, _column_of(raw, 0))
            try:
                n_qubits = int(tokens[1])
            except ValueError:
                raise CircuitFormatError(f"bad qubit count {tokens[1]!r}", lineno,
                                         _column_of(raw, 1)) from None
            if n_qubits < 1:
                raise CircuitFormatError("qubit count must be positive", lineno, _column_of(raw, 1))
            continue
        try:
            kind = GateKind.from_name(tokens[0])
        except KeyError:
            raise CircuitFormatError(f"unknown gate {tokens[0]!r}", lineno,
                                     _column_of(raw, 0)) from None
        expected = 1 + kind.arity + kind.n_params
        if len(tokens) != expected:
            # point at the first surplus token, or just past the line when short
            col = _column_of(raw, expected) if len(tokens) > expected else len(raw) + 1
            raise CircuitFormatError(
                f"{kind.value} expects {kind.arity} qubit(s) and {kind.n_params} angle(s), "
                f"got {len(tokens) - 1} argument(s)", lineno, col)
        qubits = []
        for ti in range(1, 1 + kind.arity):
            try:
                q = int(tokens[ti])
            except ValueError:
                raise CircuitFormatError(f"bad qubit index {tokens[ti]!r}", lineno,
                                         _column_of(raw, ti)) from None
            if not 0 <= q < n_qubits:
                raise CircuitFormatError(f"qubit {q} out of range for {n_qubits} qubits",
                                         lineno, _column_of(raw, ti))
            qubits.append(q)
        if len(set(qubits)) != len(qubits):
            raise CircuitFormatError(f"repeated qubit in {kind.value}", lineno, _column_of(raw, 1))
        theta = None
        if kind.n_params:
            ti = 1 + kind.arity
            try:
                theta = float(tokens[ti])
            except ValueError:
                raise CircuitFormatError(f"bad angle {tokens[ti]!r}", lineno,
                                         _column_of(raw, ti)) from None
            if not math.isfinite(theta):
                raise CircuitFormatError(f"non-finite angle {tokens[ti]!r}", lineno,
                                         _column_of(raw, ti))
        gates.append(GateOp(kind, tuple(qubits), theta))
    if n_qubits is None:
        raise CircuitFormatError("missing 'qubits <n>' header", 1)
    return Circuit(n_qubits, tuple(gates))


def serialize_circuit(c: Circuit) -> str:
    return "\n".join([f"qubits {c.n_qubits}", *map(str, c.gates)])


def circuit_to_dict(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        d = {"kind": g.kind.value, "qubits": list(g.qubits)}
        if g.theta is not None:
            d["theta"] = g.theta
        gates.append(d)
    return {"n_qubits": c.n_qubits, "gates": gates}


def circuit_from_dict(d: dict) -> Circuit:
    gates = tuple(
        GateOp(GateKind.from_name(g["kind"]), tuple(g["qubits"]), g.get("theta"))
        for g in d["gates"]
    )
    return check(Circuit(int(d["n_qubits"]), gates))


def circuit_to_json(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c))
