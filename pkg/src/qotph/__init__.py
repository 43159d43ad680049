"""Quantum one-time-pad homomorphic encryption on a statevector simulator."""
from ._kernels import BACKEND
from .circuit import (Circuit, CircuitFormatError, CircuitValidationError, GateKind, GateOp,
                      parse_circuit, serialize_circuit, validate)
from .engine import (adjust_gate, evaluate_homomorphic, expand_decomposition, update_keys_only,
                     validate_rule)
from .protocol import (EncryptedRunResult, SwapRecord, fidelity, hellinger_distance,
                       local_decrypt, run_algorithm1, run_algorithm2)
from .qotp import KeyMap, KeyPair, decryption_layer, encryption_layer, generate_keys
from .sim import Statevector, init_state, run_circuit

__version__ = "0.1.0"
