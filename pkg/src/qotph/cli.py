"""Command-line entry point: ``qotph {run,decrypt,experiment,verify-rules,keys}``."""
from __future__ import annotations

import argparse
import json
import sys
import time

from .circuit import CircuitFormatError, CircuitValidationError, parse_circuit
from .engine import deviations_markdown, validate_all
from .experiment import emit_report, run_campaign
from .protocol import EncryptedRunResult, local_decrypt, run_algorithm1, run_algorithm2
from .qotp import generate_keys
from .sim import bitstring_to_bits


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    with open(args.circuit) as fh:
        circuit = parse_circuit(fh.read())
    bits = bitstring_to_bits(args.bits)
    if args.alg == 1:
        counts = run_algorithm1(bits, circuit, args.shots, args.seed, key_source=args.key_source)
        out = json.dumps(dict(sorted(counts.items())), indent=2)
    else:
        res = run_algorithm2(bits, circuit, args.shots, args.seed,
                             use_swaps=args.swaps is not None, swap_count=args.swaps,
                             use_pre_encode=args.pre_encode, key_source=args.key_source)
        out = res.to_json(indent=2)
    _write(out + "\n", args.out)
    return 0


def cmd_decrypt(args) -> int:
    with open(args.result) as fh:
        res = EncryptedRunResult.from_json(fh.read())
    counts = local_decrypt(res, args.mode)
    _write(json.dumps(dict(sorted(counts.items())), indent=2) + "\n", args.out)
    return 0


def cmd_experiment(args) -> int:
    results = run_campaign(
        args.qubits, args.gates, shots=args.shots, trials=args.trials, seed=args.seed,
        algorithm=f"alg{args.alg}", workers=args.workers, use_default_shots=not args.exact,
        swap_obfuscation=args.swaps, key_source=args.key_source, decrypt_mode=args.decrypt_mode,
    )
    text = emit_report(results, args.format, args.out, timing=args.timing)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_verify_rules(args) -> int:
    start = time.perf_counter()
    reports = validate_all()
    elapsed = time.perf_counter() - start
    payload = {
        "accepted": all(r.accepted for r in reports),
        "tolerance": 1e-9,
        "seconds": elapsed,
        "rules": [r.to_dict() for r in reports],
    }
    _write(json.dumps(payload, indent=2) + "\n", args.out)
    if args.deviations:
        with open(args.deviations, "w") as fh:
            fh.write(deviations_markdown(reports))
    for r in reports:
        if not r.accepted:
            print(f"rule {r.kind.value} rejected: deviation {r.max_deviation:.3g}", file=sys.stderr)
    return 0 if payload["accepted"] else 1


def cmd_keys(args) -> int:
    keys = generate_keys(args.n, args.source, args.seed)
    print(keys.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qotph", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one circuit through algorithm 1 or 2")
    r.add_argument("--circuit", required=True, help="circuit text file")
    r.add_argument("--bits", required=True, help="input bits, qubit 0 leftmost")
    r.add_argument("--alg", type=int, choices=(1, 2), default=1)
    r.add_argument("--shots", type=int, default=1024)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--swaps", type=int, default=None, metavar="K",
                   help="append K random swaps before measurement (algorithm 2)")
    r.add_argument("--pre-encode", action="store_true",
                   help="fold the X-keys into the input bits (algorithm 2)")
    r.add_argument("--key-source", choices=("pseudo", "qrng"), default="pseudo")
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("decrypt", help="locally decrypt an algorithm 2 result")
    d.add_argument("--result", required=True)
    d.add_argument("--mode", choices=("circuit", "classical"), default="circuit")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decrypt)

    e = sub.add_parser("experiment", help="random-circuit fidelity campaign")
    e.add_argument("--qubits", type=_int_list, required=True, help="e.g. 5,10")
    e.add_argument("--gates", type=_int_list, required=True, help="e.g. 5,10,15")
    e.add_argument("--shots", type=int, default=None,
                   help="shots per trial; default follows the built-in per-row table")
    e.add_argument("--exact", action="store_true", help="exact distributions, no sampling")
    e.add_argument("--trials", type=int, default=20)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--alg", type=int, choices=(1, 2), default=1)
    e.add_argument("--swaps", action="store_true", help="random swap obfuscation (algorithm 2)")
    e.add_argument("--decrypt-mode", choices=("circuit", "classical"), default="circuit")
    e.add_argument("--key-source", choices=("pseudo", "qrng"), default="pseudo")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--timing", action="store_true", help="include per-trial wall clock (JSON)")
    e.add_argument("--out")
    e.add_argument("--format", choices=("json", "csv"), default="csv")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify-rules", help="certify every rewrite rule with the unitary oracle")
    v.add_argument("--out")
    v.add_argument("--deviations", help="also write the rule-deviation markdown here")
    v.set_defaults(func=cmd_verify_rules)

    k = sub.add_parser("keys", help="generate a key map")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--source", choices=("pseudo", "qrng"), default="pseudo")
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=cmd_keys)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CircuitFormatError, CircuitValidationError, ValueError, OSError) as exc:
        print(f"qotph: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
