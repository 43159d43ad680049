"""
Random-circuit experiment campaigns and report emission.

Every trial draws its circuit, input bits, keys and sampling stream from a
seed sequence keyed by (seed, qubits, gates, trial), so rows and trials are
independent of execution order and of the worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import Circuit, GateKind, GateOp
from .protocol import (algorithm1_state, fidelity, hellinger_distance, local_decrypt,
                       run_algorithm2)
from .qotp import generate_keys
from .sim import distribution, run_circuit, sample_counts

# shots per (qubits, gates) row used when a campaign does not pin them
DEFAULT_SHOTS = {
    (5, 5): 10000, (5, 10): 15000, (5, 15): 20000,
    (10, 5): 30000, (10, 10): 30000, (10, 15): 30000,
    (20, 5): 50000, (20, 10): 50000, (20, 15): 50000,
}
FALLBACK_SHOTS = 20000

CSV_COLUMNS = ["Qubits", "Gates", "Shots", "MeanFidelity", "MeanHellinger", "Trials"]


def eligible_kinds(n: int) -> list[GateKind]:
    return [k for k in GateKind if k.arity <= n]


def random_circuit(n: int, gate_count: int, rng) -> Circuit:
    """Kinds uniform over those fitting ``n`` qubits; qubits without replacement."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    pool = eligible_kinds(n)
    gates = []
    for _ in range(gate_count):
        kind = pool[int(rng.integers(len(pool)))]
        qubits = tuple(int(q) for q in rng.choice(n, size=kind.arity, replace=False))
        theta = float(rng.uniform(0.0, 2 * math.pi)) if kind.n_params else None
        gates.append(GateOp(kind, qubits, theta))
    return Circuit(n, tuple(gates))


@dataclass(frozen=True)
class ExperimentConfig:
    n_qubits: int
    gate_count: int
    shots: int | None  # None: exact distributions
    trials: int = 20
    seed: int = 0
    algorithm: str = "alg1"
    swap_obfuscation: bool = False
    key_source: str = "pseudo"
    decrypt_mode: str = "circuit"
    sampled_reference: bool = False

    def __post_init__(self):
        if self.n_qubits < 1 or self.gate_count < 0 or self.trials < 1:
            raise ValueError("qubits and trials must be positive, gates non-negative")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive")
        if self.algorithm not in ("alg1", "alg2"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class TrialResult:
    trial: int
    fidelity: float
    hellinger: float
    seconds: float = 0.0


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[TrialResult] = field(default_factory=list)

    @property
    def fidelities(self) -> list[float]:
        return [t.fidelity for t in self.trials]

    @property
    def mean_fidelity(self) -> float:
        return math.fsum(self.fidelities) / len(self.trials)

    @property
    def mean_hellinger(self) -> float:
        return math.fsum(t.hellinger for t in self.trials) / len(self.trials)

    def to_dict(self, timing: bool = False) -> dict:
        trials = []
        for t in self.trials:
            d = {"trial": t.trial, "fidelity": t.fidelity, "hellinger": t.hellinger}
            if timing:
                d["seconds"] = t.seconds
            trials.append(d)
        return {
            "config": asdict(self.config),
            "mean_fidelity": self.mean_fidelity,
            "mean_hellinger": self.mean_hellinger,
            "trials": trials,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        trials = [TrialResult(t["trial"], t["fidelity"], t["hellinger"], t.get("seconds", 0.0))
                  for t in d["trials"]]
        return cls(ExperimentConfig(**d["config"]), trials)


def _trial_rngs(cfg: ExperimentConfig, trial: int):
    ss = np.random.SeedSequence([cfg.seed, cfg.n_qubits, cfg.gate_count, trial])
    circ, bits, keys, run, ref = ss.spawn(5)
    return np.random.default_rng(circ), np.random.default_rng(bits), keys, run, ref


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialResult:
    start = time.perf_counter()
    circ_rng, bits_rng, keys_ss, run_ss, ref_ss = _trial_rngs(cfg, trial)
    n = cfg.n_qubits
    c = random_circuit(n, cfg.gate_count, circ_rng)
    bits = bits_rng.integers(0, 2, size=n).tolist()
    keys = generate_keys(n, cfg.key_source, keys_ss)

    plain = run_circuit(c, bits)
    if cfg.shots is not None and cfg.sampled_reference:
        reference = sample_counts(plain, cfg.shots, np.random.default_rng(ref_ss))
    else:
        reference = distribution(plain)

    if cfg.algorithm == "alg1":
        sv, _ = algorithm1_state(bits, c, keys)
        if cfg.shots is None:
            observed = distribution(sv)
        else:
            observed = sample_counts(sv, cfg.shots, np.random.default_rng(run_ss))
    else:
        enc = run_algorithm2(bits, c, cfg.shots, seed=run_ss, keys=keys,
                             use_swaps=cfg.swap_obfuscation)
        observed = local_decrypt(enc, cfg.decrypt_mode)
    h = hellinger_distance(reference, observed)
    return TrialResult(trial, fidelity(reference, observed), h, time.perf_counter() - start)


def _run_trial_args(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            trials = list(pool.map(_run_trial_args, jobs))
    else:
        trials = [run_trial(*job) for job in jobs]
    trials.sort(key=lambda t: t.trial)
    return ExperimentResult(cfg, trials)


def run_campaign(qubits, gates, shots: int | None = None, trials: int = 20, seed: int = 0,
                 algorithm: str = "alg1", workers: int = 1, use_default_shots: bool = True,
                 **cfg_kw) -> list[ExperimentResult]:
    """One experiment per (qubits, gates) pair, sorted by (qubits, gates).

    With ``shots=None`` and ``use_default_shots`` the per-row shot counts
    follow ``DEFAULT_SHOTS``; with ``use_default_shots=False`` rows are exact.
    """
    results = []
    for n in sorted(set(qubits)):
        for g in sorted(set(gates)):
            row_shots = shots
            if shots is None and use_default_shots:
                row_shots = DEFAULT_SHOTS.get((n, g), FALLBACK_SHOTS)
            cfg = ExperimentConfig(n, g, row_shots, trials, seed, algorithm, **cfg_kw)
            results.append(run_experiment(cfg, workers))
    return results


def _float(x: float) -> str:
    return repr(float(x))


def report_csv(results) -> str:
    results = sorted(_as_list(results), key=lambda r: (r.config.n_qubits, r.config.gate_count))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        shots = "exact" if r.config.shots is None else r.config.shots
        w.writerow([r.config.n_qubits, r.config.gate_count, shots, _float(r.mean_fidelity),
                    _float(r.mean_hellinger), len(r.trials)])
    return buf.getvalue()


def report_json(results, timing: bool = False) -> str:
    results = sorted(_as_list(results), key=lambda r: (r.config.n_qubits, r.config.gate_count))
    return json.dumps({"results": [r.to_dict(timing) for r in results]}, indent=2) + "\n"


def load_report_json(text: str) -> list[ExperimentResult]:
    return [ExperimentResult.from_dict(d) for d in json.loads(text)["results"]]


def _as_list(results) -> list[ExperimentResult]:
    return [results] if isinstance(results, ExperimentResult) else list(results)


def emit_report(results, fmt: str, path=None, timing: bool = False) -> str:
    """Render results as ``json`` or ``csv``; write to ``path`` when given."""
    if fmt == "csv":
        text = report_csv(results)
    elif fmt == "json":
        text = report_json(results, timing)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text
