"""Command-line entry point: run protocols, derive plans, execute audits.

Exit status contract: 0 pass, 1 run/audit failure, 2 input error,
3 resource limit, 4 post-selection failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import audit, keyalg, protocol, qsim
from .circuits import CircuitParseError, apply_circuit, parse_circuit, profile, random_circuit

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_POSTSELECT = 4


class InputError(ValueError):
    """Bad command-line input (maps to exit status 2)."""


def _load_circuit(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read circuit file {path}: {exc}")
    return parse_circuit(text)


def _parse_input_spec(spec: str, n: int) -> qsim.StateVector:
    if spec == "plus":
        state = qsim.new_state(n)
        for w in range(1, n + 1):
            state = qsim.apply_gate(state, qsim.GateId("H", (w,)))
        return state
    if spec.startswith("random:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad random input spec {spec!r}")
        return qsim.random_state(n, np.random.default_rng(seed))
    if spec and all(ch in "01" for ch in spec):
        if len(spec) != n:
            raise InputError(f"input {spec!r} has {len(spec)} bits, circuit wants {n}")
        return qsim.basis_state([int(ch) for ch in spec])
    raise InputError(f"unrecognized input spec {spec!r}")


def _parse_forced(bits: str, m: int) -> list[tuple[int, int]]:
    if not bits or any(ch not in "01" for ch in bits):
        raise InputError(f"--forced wants a 0/1 string, got {bits!r}")
    if len(bits) != 2 * m:
        raise InputError(f"--forced wants 2M = {2 * m} bits, got {len(bits)}")
    pairs = [(int(bits[2 * i]), int(bits[2 * i + 1])) for i in range(m)]
    return pairs


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> int:
    circuit = _load_circuit(args.circuit)
    prof = profile(circuit)
    plaintext = _parse_input_spec(args.input, circuit.num_wires)
    forced = _parse_forced(args.forced, prof.m) if args.forced is not None else None
    result = protocol.run_end_to_end(
        args.scheme, circuit, plaintext, seed=args.seed, forced_outcomes=forced
    )
    fidelity = qsim.fidelity_up_to_phase(
        result.output_state, apply_circuit(plaintext, circuit)
    )
    passed = fidelity >= 1.0 - args.tolerance
    _emit(
        {
            "circuit": args.circuit,
            "scheme": args.scheme,
            "n": circuit.num_wires,
            "M": prof.m,
            "input": args.input,
            "seed": args.seed,
            "generator": f"pcg64:{args.seed}",
            "forced": args.forced,
            "tolerance": args.tolerance,
            "fidelity": fidelity,
            "pass": passed,
            "outcomes": [[o.a, o.b] for o in result.outcomes],
            "final_key": {"x": list(result.final_key.x), "z": list(result.final_key.z)},
            "transcript": result.transcript.to_json(),
        },
        args.out,
    )
    return EXIT_PASS if passed else EXIT_FAIL


def _cmd_plan(args) -> int:
    circuit = _load_circuit(args.circuit)
    plan = keyalg.derive_plan(args.scheme, circuit)
    text = keyalg.plan_to_text(plan)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def _cmd_audit_qotp(args) -> int:
    if not 1 <= args.n <= 3:
        raise InputError("--n must be in 1..3 for the exhaustive audit")
    rng = np.random.default_rng(args.seed)
    battery = audit.qotp_plaintext_battery(args.n, rng, count=args.plaintexts)
    report = audit.qotp_security_audit(args.n, battery, tolerance=args.tolerance)
    _emit(report.to_json(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_audit_eg(args) -> int:
    rng = np.random.default_rng(args.seed)
    reports = [
        audit.eg_security_audit(qsim.random_state(1, rng), tolerance=args.tolerance)
        for _ in range(args.trials)
    ]
    payload = {
        "trials": args.trials,
        "max_probability_deviation": max(r.max_probability_deviation for r in reports),
        "max_distance_to_mixed": max(max(r.distance_to_mixed) for r in reports),
        "max_cross_view_distance": max(r.cross_view_distance for r in reports),
        "tolerance": args.tolerance,
        "pass": all(r.passed for r in reports),
    }
    _emit(payload, args.out)
    return EXIT_PASS if payload["pass"] else EXIT_FAIL


def _cmd_audit_deferred(args) -> int:
    circuit = _load_circuit(args.circuit)
    prof = profile(circuit)
    plaintext = _parse_input_spec(args.input or "0" * circuit.num_wires, circuit.num_wires)
    if args.exhaustive:
        tuples = [
            list(zip(bits[0::2], bits[1::2]))
            for bits in itertools.product((0, 1), repeat=2 * prof.m)
        ]
    else:
        rng = np.random.default_rng(args.seed)
        tuples = [
            [(int(rng.integers(2)), int(rng.integers(2))) for _ in range(prof.m)]
            for _ in range(args.tuples)
        ]
    reports = [
        audit.deferred_equivalence(circuit, plaintext, forced, tolerance=args.tolerance)
        for forced in tuples
    ]
    payload = {
        "circuit": args.circuit,
        "tuples": len(tuples),
        "max_fidelity_gap": max((r.fidelity_gap for r in reports), default=0.0),
        "max_probability_gap": max((r.probability_gap for r in reports), default=0.0),
        "keys_match": all(r.keys_match for r in reports),
        "tolerance": args.tolerance,
        "pass": all(r.passed for r in reports),
    }
    _emit(payload, args.out)
    return EXIT_PASS if payload["pass"] else EXIT_FAIL


def _cmd_audit_compactness(args) -> int:
    circuit = _load_circuit(args.circuit)
    plan = keyalg.derive_plan(args.scheme, circuit)
    report = audit.compactness_report(plan)
    _emit(report.to_json(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_audit_homomorphism(args) -> int:
    rng = np.random.default_rng(args.seed)
    circuits = [random_circuit(rng) for _ in range(args.trials)]
    report = audit.homomorphism_sweep(
        args.scheme, circuits, seeds_per_circuit=args.seeds, seed=args.seed
    )
    _emit(report.to_json(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtqhe",
        description="Teleportation-based quantum homomorphic encryption lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scheme end to end on a circuit")
    run.add_argument("--scheme", choices=("gt", "vgt"), required=True)
    run.add_argument("--circuit", required=True)
    run.add_argument(
        "--input", required=True, help="bit string, 'plus', or 'random:<seed>'"
    )
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--tolerance", type=float, default=1e-9)
    run.add_argument("--forced", default=None, help="2M forced outcome bits")
    run.add_argument("--out", default=None)
    run.set_defaults(func=_cmd_run)

    plan = sub.add_parser("plan", help="derive and serialize a key-update plan")
    plan.add_argument("--scheme", choices=("gt", "vgt"), required=True)
    plan.add_argument("--circuit", required=True)
    plan.add_argument("--out", default=None)
    plan.set_defaults(func=_cmd_plan)

    aud = sub.add_parser("audit", help="run one of the verification audits")
    kinds = aud.add_subparsers(dest="kind", required=True)

    qotp = kinds.add_parser("qotp", help="perfect security of the one-time pad")
    qotp.add_argument("--n", type=int, required=True)
    qotp.add_argument("--plaintexts", type=int, default=10)
    qotp.add_argument("--seed", type=int, default=0)
    qotp.add_argument("--tolerance", type=float, default=audit.EXACT_TOL)
    qotp.add_argument("--out", default=None)
    qotp.set_defaults(func=_cmd_audit_qotp)

    eg = kinds.add_parser("eg", help="encrypted-gate security")
    eg.add_argument("--trials", type=int, default=20)
    eg.add_argument("--seed", type=int, default=0)
    eg.add_argument("--tolerance", type=float, default=audit.EXACT_TOL)
    eg.add_argument("--out", default=None)
    eg.set_defaults(func=_cmd_audit_eg)

    deferred = kinds.add_parser("deferred", help="deferred-measurement equivalence")
    deferred.add_argument("--circuit", required=True)
    deferred.add_argument("--input", default=None)
    deferred.add_argument("--exhaustive", action="store_true")
    deferred.add_argument("--tuples", type=int, default=16)
    deferred.add_argument("--seed", type=int, default=0)
    deferred.add_argument("--tolerance", type=float, default=audit.SIM_TOL)
    deferred.add_argument("--out", default=None)
    deferred.set_defaults(func=_cmd_audit_deferred)

    compact = kinds.add_parser("compactness", help="plan arity bounds")
    compact.add_argument("--scheme", choices=("gt", "vgt"), required=True)
    compact.add_argument("--circuit", required=True)
    compact.add_argument("--out", default=None)
    compact.set_defaults(func=_cmd_audit_compactness)

    homo = kinds.add_parser("homomorphism", help="end-to-end correctness sweep")
    homo.add_argument("--scheme", choices=("gt", "vgt"), required=True)
    homo.add_argument("--trials", type=int, default=100)
    homo.add_argument("--seeds", type=int, default=10)
    homo.add_argument("--seed", type=int, default=1)
    homo.add_argument("--out", default=None)
    homo.set_defaults(func=_cmd_audit_homomorphism)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, CircuitParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except qsim.ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except qsim.PostSelectionError as exc:
        print(f"post-selection failure: {exc}", file=sys.stderr)
        return EXIT_POSTSELECT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
