import csv
import io
import json
import math
from collections import Counter

import numpy as np
import pytest

from qotph.circuit import GateKind
from qotph.experiment import (CSV_COLUMNS, DEFAULT_SHOTS, ExperimentConfig, ExperimentResult,
                              TrialResult, eligible_kinds, emit_report, load_report_json,
                              random_circuit, report_csv, report_json, run_campaign,
                              run_experiment)


def test_random_circuit_deterministic_and_in_bounds():
    a = random_circuit(5, 15, 123)
    assert a == random_circuit(5, 15, 123)
    assert len(a.gates) == 15
    for g in a.gates:
        assert all(0 <= q < 5 for q in g.qubits)
        assert len(set(g.qubits)) == len(g.qubits)
        if g.kind.n_params:
            assert 0.0 <= g.theta < 2 * math.pi


def test_small_registers_exclude_three_qubit_kinds():
    pool = eligible_kinds(2)
    assert not {GateKind.CCX, GateKind.CCZ, GateKind.CSWAP, GateKind.CXX} & set(pool)
    assert all(g.kind.arity == 1 for g in random_circuit(1, 50, 0).gates)
    with pytest.raises(ValueError):
        random_circuit(0, 3, 0)


def test_kind_frequencies_uniform():
    draws = 10**5
    counts = Counter(g.kind for g in random_circuit(4, draws, 99).gates)
    pool = eligible_kinds(4)
    p = 1 / len(pool)
    sigma = math.sqrt(draws * p * (1 - p))
    for kind in pool:
        assert abs(counts[kind] - draws * p) <= 3 * sigma + 1, kind


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(0, 5, 100)
    with pytest.raises(ValueError):
        ExperimentConfig(3, 5, 0)
    with pytest.raises(ValueError):
        ExperimentConfig(3, 5, 100, trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(3, 5, 100, algorithm="alg3")


@pytest.mark.parametrize("algorithm", ["alg1", "alg2"])
def test_exact_mode_has_unit_fidelity(algorithm):
    res = run_experiment(ExperimentConfig(4, 12, None, trials=10, seed=5, algorithm=algorithm,
                                          swap_obfuscation=algorithm == "alg2"))
    for t in res.trials:
        assert abs(t.fidelity - 1.0) <= 1e-9
        assert t.hellinger <= 1e-4


def test_mean_is_arithmetic_mean():
    res = run_experiment(ExperimentConfig(3, 6, 500, trials=7, seed=2))
    assert abs(res.mean_fidelity - sum(res.fidelities) / 7) <= 1e-12
    assert len(res.trials) == 7


def test_sampled_reference_mode():
    res = run_experiment(ExperimentConfig(3, 6, 2000, trials=3, seed=2, sampled_reference=True))
    assert all(0.99 <= f <= 1.0 for f in res.fidelities)


def test_qrng_key_source():
    res = run_experiment(ExperimentConfig(3, 6, None, trials=2, key_source="qrng"))
    assert all(abs(f - 1) <= 1e-9 for f in res.fidelities)


def test_trials_independent_of_worker_count():
    cfg = ExperimentConfig(3, 5, 300, trials=3, seed=8)
    assert run_experiment(cfg, workers=2).to_dict() == run_experiment(cfg).to_dict()


def test_campaign_shape():
    results = run_campaign([10, 5], [15, 5, 10], trials=1, seed=0, use_default_shots=False)
    keys = [(r.config.n_qubits, r.config.gate_count) for r in results]
    assert keys == [(5, 5), (5, 10), (5, 15), (10, 5), (10, 10), (10, 15)]
    rows = list(csv.reader(io.StringIO(report_csv(results))))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 7
    assert rows[1][:3] == ["5", "5", "exact"]


def test_default_shots_table():
    results = run_campaign([5], [5], trials=1)
    assert results[0].config.shots == DEFAULT_SHOTS[(5, 5)]
    assert run_campaign([3], [2], trials=1)[0].config.shots == 20000
    assert run_campaign([3], [2], shots=77, trials=1)[0].config.shots == 77


def test_single_result_csv():
    res = run_experiment(ExperimentConfig(2, 3, 100, trials=2))
    lines = report_csv(res).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2
    assert lines[1].startswith("2,3,100,")


def test_json_round_trip():
    results = run_campaign([3], [4, 2], shots=200, trials=2, seed=1)
    text = report_json(results)
    back = load_report_json(text)
    assert [r.to_dict() for r in back] == [r.to_dict() for r in results]
    assert report_json(back) == text
    assert "seconds" not in text


def test_json_timing_is_opt_in():
    res = run_experiment(ExperimentConfig(2, 2, 50, trials=1))
    d = json.loads(report_json(res, timing=True))
    assert d["results"][0]["trials"][0]["seconds"] >= 0


def test_campaign_is_byte_identical():
    kw = dict(shots=500, trials=3, seed=17, algorithm="alg2", swap_obfuscation=True)
    a = run_campaign([3, 4], [5], **kw)
    b = run_campaign([3, 4], [5], **kw)
    assert report_csv(a) == report_csv(b)
    assert report_json(a) == report_json(b)


def test_emit_report(tmp_path):
    res = ExperimentResult(ExperimentConfig(2, 2, 10, trials=1), [TrialResult(0, 1.0, 0.0)])
    path = tmp_path / "r.csv"
    assert emit_report(res, "csv", path) == path.read_text()
    with pytest.raises(ValueError):
        emit_report(res, "xml")
    with pytest.raises(OSError):
        emit_report(res, "json", tmp_path / "missing" / "r.json")


def test_different_seeds_differ():
    a = run_experiment(ExperimentConfig(3, 8, 300, trials=2, seed=1))
    b = run_experiment(ExperimentConfig(3, 8, 300, trials=2, seed=2))
    assert not np.allclose(a.fidelities, b.fidelities)
