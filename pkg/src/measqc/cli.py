"""Command-line front end.

Subcommands::

    measqc run CIRCUIT.json [--epsilon E] [--seed S] [--shots N]
                            [--max-qubits Q] [--on-exhaustion abort|continue]
    measqc lower CIRCUIT.json [--epsilon E]
    measqc verify (--gate NAME | CIRCUIT.json) [--depth D] [--shots N] [--seed S]
    measqc classical (--gate NAME | --table JSON) [--attempts A] [--runs N] [--seed S]
    measqc budget [--epsilon E]

Reports go to stdout as JSON.  Errors go to stderr as a JSON object with a
stable ``code``; exit status is 0 on success, 1 for bad input, 2 for an
internal invariant violation, including a failed verification check (whose
report is still printed).  ``--seed`` defaults to the ``SEED`` environment
variable, then to 0.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections import Counter

import numpy as np

from . import __version__
from .classical import CLASSICAL_GATES, ClassicalGateTable, classical_rus
from .compiler import (
    NAMED_GATES,
    Circuit,
    GateSpec,
    execute_program,
    failure_bound,
    instruction_census,
    lower_circuit,
)
from .core import FIDELITY_ATOL, fidelity
from .errors import InputError, MeasQCError, SchemaError
from .measurement import extract_state
from .rng import make_rng, shot_streams
from .verification import (
    iteration_statistics,
    run_standard,
    verify_circuit,
    verify_gate_report,
)

SCHEMA_VERSION = "1"


# circuit documents

def _field(obj, key, where, kind, required=True):
    if key not in obj:
        if required:
            raise SchemaError(f"{where}: missing field {key!r}")
        return None
    value = obj[key]
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise SchemaError(f"{where}.{key}: expected {_kind_name(kind)}, got {type(value).__name__}")
    return value


def _kind_name(kind):
    names = {int: "integer", str: "string", list: "array", dict: "object"}
    return names.get(kind, getattr(kind, "__name__", str(kind)))


def _matrix(raw, where):
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{where}: expected a non-empty array of rows")
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != len(raw):
            raise SchemaError(f"{where}[{i}]: expected a row of {len(raw)} entries")
        entries = []
        for k, z in enumerate(row):
            ok = (
                isinstance(z, list) and len(z) == 2
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
            )
            if not ok or not all(math.isfinite(x) for x in z):
                raise SchemaError(f"{where}[{i}][{k}]: expected a finite [re, im] pair")
            entries.append(complex(z[0], z[1]))
        rows.append(entries)
    return np.array(rows, dtype=complex)


def parse_circuit(text):
    """Parse and validate a circuit document (see README for the schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document: expected a JSON object")
    version = _field(doc, "version", "document", str, required=False)
    if version is not None and version != SCHEMA_VERSION:
        raise SchemaError(f"document.version: unsupported version {version!r}")
    n = _field(doc, "num_qubits", "document", int)
    if n < 1:
        raise SchemaError("document.num_qubits: must be >= 1")
    initial = _field(doc, "initial", "document", str, required=False) or ""
    raw_gates = _field(doc, "gates", "document", list, required=False) or []
    unknown = set(doc) - {"version", "num_qubits", "initial", "gates"}
    if unknown:
        raise SchemaError(f"document: unknown field(s) {sorted(unknown)}")

    gates = []
    for i, g in enumerate(raw_gates):
        where = f"gates[{i}]"
        if not isinstance(g, dict):
            raise SchemaError(f"{where}: expected an object")
        name = _field(g, "name", where, str)
        targets = _field(g, "targets", where, list)
        if not targets or not all(isinstance(t, int) and not isinstance(t, bool) for t in targets):
            raise SchemaError(f"{where}.targets: expected a non-empty array of integers")
        unknown = set(g) - {"name", "targets", "matrix"}
        if unknown:
            raise SchemaError(f"{where}: unknown field(s) {sorted(unknown)}")
        if name == "CUSTOM":
            if "matrix" not in g:
                raise SchemaError(f"{where}: CUSTOM gate needs a matrix")
            U = _matrix(g["matrix"], f"{where}.matrix")
            gates.append(GateSpec(name, tuple(targets), U))
        elif name in NAMED_GATES:
            if "matrix" in g:
                raise SchemaError(f"{where}: named gate {name} must not carry a matrix")
            gates.append(GateSpec.named(name, *targets))
        else:
            raise SchemaError(f"{where}.name: unknown gate {name!r}")
    return Circuit(n, tuple(gates), initial)


def _read_circuit(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise SchemaError(f"{path}: not UTF-8 text") from None
    return parse_circuit(text)


# reports

def _stats(values):
    if not values:
        return {"count": 0, "min": None, "mean": None, "max": None}
    return {
        "count": len(values),
        "min": float(min(values)),
        "mean": float(np.mean(values)),
        "max": float(max(values)),
    }


def run_report(circuit, epsilon, seed, shots, max_qubits, on_exhaustion):
    """Lower ``circuit``, execute it ``shots`` times and summarize."""
    program = lower_circuit(circuit, epsilon)
    expected = run_standard(circuit)
    tasks = [
        {"name": t.name, "targets": list(t.targets), "budget": t.budget,
         "rounds": Counter(), "succeeded": 0, "exhausted": 0, "skipped": 0}
        for t in program.tasks
    ]
    readout = Counter()
    fids, instructions = [], []
    exhausted = aborted = 0
    for stream in shot_streams(seed, shots):
        run = execute_program(program, stream, on_exhaustion, max_qubits)
        readout[run.bits] += 1
        instructions.append(run.instructions)
        for summary, tr in zip(tasks, run.transcripts):
            summary["rounds"][len(tr.rounds)] += 1
            summary["succeeded" if tr.succeeded else "exhausted"] += 1
        for summary in tasks[len(run.transcripts):]:
            summary["skipped"] += 1
        exhausted += not run.succeeded
        aborted += run.aborted
        if run.succeeded:
            fids.append(fidelity(extract_state(run.pre_readout, run.logical), expected))
    for summary in tasks:
        summary["rounds"] = {str(k): v for k, v in sorted(summary["rounds"].items())}

    bound = failure_bound(program)
    return {
        "version": SCHEMA_VERSION,
        "config": {
            "epsilon": epsilon, "seed": seed, "shots": shots,
            "max_qubits": max_qubits, "on_exhaustion": on_exhaustion,
            "budgets": {"r1": program.budgets.r1, "r2": program.budgets.r2},
        },
        "circuit": {"num_qubits": circuit.num_qubits, "initial": circuit.initial,
                    "gates": [{"name": g.name, "targets": list(g.targets)} for g in circuit.gates]},
        "tasks": tasks,
        "readout_histogram": dict(sorted(readout.items())),
        "fidelity": {**_stats(fids), "threshold": 1 - FIDELITY_ATOL,
                     "all_pass": all(f >= 1 - FIDELITY_ATOL for f in fids)},
        "failures": {
            "exhausted_runs": exhausted, "aborted_runs": aborted,
            "rate": exhausted / shots, "failure_bound": bound,
            "slack_5sigma": 5 * math.sqrt(bound * (1 - bound) / shots) if bound < 1 else 0.0,
        },
        "instructions": {**_stats(instructions), "census": instruction_census(program)},
    }


def lower_report(circuit, epsilon):
    program = lower_circuit(circuit, epsilon)
    return {
        "version": SCHEMA_VERSION,
        "epsilon": epsilon,
        "budgets": {"r1": program.budgets.r1, "r2": program.budgets.r2},
        "num_logical": program.num_logical,
        "tasks": [
            {"name": t.name, "targets": list(t.targets), "arity": t.arity,
             "budget": t.budget, "loads_initial": t.loads_initial,
             "failure_probability": t.failure_ratio**t.budget,
             "max_instructions": t.max_instructions}
            for t in program.tasks
        ],
        "readout": list(program.readout),
        "failure_bound": failure_bound(program),
        "instruction_census": instruction_census(program),
    }


def classical_report(gate, attempts, runs, seed):
    rows = []
    streams = iter(shot_streams(seed, runs * len(gate.table)))
    for x, gx in gate.table.items():
        used, outputs = Counter(), Counter()
        successes = 0
        for _ in range(runs):
            out, a, ok = classical_rus(x, gate, attempts, next(streams))
            used[a] += 1
            successes += ok
            if ok:
                outputs["".join(map(str, out))] += 1
        correct = set(outputs) <= {"".join(map(str, gx))}
        rows.append({
            "input": "".join(map(str, x)),
            "expected": "".join(map(str, gx)),
            "successes": successes,
            "outputs_on_success": dict(sorted(outputs.items())),
            "attempts_histogram": {str(k): v for k, v in sorted(used.items())},
            "correct": correct,
        })
    p = 1 / (1 << gate.arity_in)
    return {
        "arity_in": gate.arity_in, "arity_out": gate.arity_out,
        "attempts": attempts, "runs_per_input": runs, "seed": seed,
        "success_probability_per_attempt": p,
        "exhaustion_probability": (1 - p) ** attempts,
        "inputs": rows,
        "pass": all(r["correct"] for r in rows),
    }


def _parse_table(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"--table: not valid JSON: {exc}") from None
    if not isinstance(raw, dict) or not raw:
        raise SchemaError("--table: expected an object mapping input bits to output bits")
    table = {}
    for k, v in raw.items():
        if not isinstance(v, str) or not k or set(k + v) - {"0", "1"}:
            raise SchemaError(f"--table: entry {k!r}: {v!r} is not a bit-string pair")
        table[tuple(int(b) for b in k)] = tuple(int(b) for b in v)
    return ClassicalGateTable(len(next(iter(table))), len(next(iter(table.values()))), table)


# argument handling

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"usage: {message}")


def _epsilon(text):
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"--epsilon: {text!r} is not a number") from None
    if not 0 < value < 1:
        raise InputError(f"--epsilon: must lie in (0, 1), got {text}")
    return value


def _positive(flag):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise InputError(f"{flag}: {text!r} is not an integer") from None
        if value < 1:
            raise InputError(f"{flag}: must be >= 1, got {value}")
        return value
    return parse


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SEED")
    if env is None:
        return 0
    try:
        value = int(env)
    except ValueError:
        raise InputError(f"SEED environment variable {env!r} is not an integer") from None
    if value < 0:
        raise InputError("SEED must be non-negative")
    return value


def build_parser():
    p = _Parser(prog="measqc", description="Measurement-only quantum computation toolkit.")
    p.add_argument("--version", action="version", version=f"measqc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=_positive_or_zero, default=None,
                        help="root seed (default: $SEED, else 0)")

    r = sub.add_parser("run", help="lower and execute a circuit")
    r.add_argument("circuit")
    r.add_argument("--epsilon", type=_epsilon, default=1e-3)
    seeded(r)
    r.add_argument("--shots", type=_positive("--shots"), default=1000)
    r.add_argument("--max-qubits", type=_positive("--max-qubits"), default=16)
    r.add_argument("--on-exhaustion", choices=("abort", "continue"), default="abort")

    lo = sub.add_parser("lower", help="print the lowered program summary")
    lo.add_argument("circuit")
    lo.add_argument("--epsilon", type=_epsilon, default=1e-3)

    v = sub.add_parser("verify", help="check against the gate-model oracle")
    v.add_argument("circuit", nargs="?")
    v.add_argument("--gate", choices=sorted(NAMED_GATES))
    v.add_argument("--depth", type=_positive("--depth"), default=None)
    v.add_argument("--shots", type=_positive("--shots"), default=None)
    v.add_argument("--epsilon", type=_epsilon, default=1e-3)
    seeded(v)

    c = sub.add_parser("classical", help="classical repeat-until-success demo")
    c.add_argument("--gate", choices=sorted(CLASSICAL_GATES))
    c.add_argument("--table", help='JSON truth table, e.g. {"0": "1", "1": "0"}')
    c.add_argument("--attempts", type=_positive("--attempts"), default=10)
    c.add_argument("--runs", type=_positive("--runs"), default=1000)
    seeded(c)

    b = sub.add_parser("budget", help="print attempt budgets for an epsilon")
    b.add_argument("--epsilon", type=_epsilon, default=1e-5)
    return p


def _positive_or_zero(text):
    try:
        value = int(text)
    except ValueError:
        raise InputError(f"--seed: {text!r} is not an integer") from None
    if value < 0:
        raise InputError("--seed: must be non-negative")
    return value


def _dispatch(args):
    if args.command == "budget":
        program = lower_circuit(Circuit(1), args.epsilon)
        return {"epsilon": args.epsilon, "r1": program.budgets.r1, "r2": program.budgets.r2}, True
    if args.command == "lower":
        return lower_report(_read_circuit(args.circuit), args.epsilon), True
    if args.command == "run":
        report = run_report(
            _read_circuit(args.circuit), args.epsilon, _seed(args), args.shots,
            args.max_qubits, args.on_exhaustion,
        )
        return report, True
    if args.command == "classical":
        if (args.gate is None) == (args.table is None):
            raise InputError("classical: give exactly one of --gate or --table")
        gate = CLASSICAL_GATES[args.gate] if args.gate else _parse_table(args.table)
        report = classical_report(gate, args.attempts, args.runs, _seed(args))
        return report, report["pass"]
    return _verify(args)


def _verify(args):
    seed = _seed(args)
    if (args.gate is None) == (args.circuit is None):
        raise InputError("verify: give exactly one of --gate or a circuit file")
    if args.circuit is not None:
        circuit = _read_circuit(args.circuit)
        report = verify_circuit(circuit, args.epsilon, args.shots or 1000, seed,
                                circuit_id=os.path.basename(args.circuit)).to_dict()
        ok = report["fidelity_ok"] and report["failure_consistent"]
        return {**report, "pass": ok}, ok
    U = NAMED_GATES[args.gate]
    arity = U.shape[0].bit_length() - 1
    depth = args.depth or (3 if arity == 1 else 2)
    g = verify_gate_report(U, arity, depth)
    report = {
        "gate": args.gate, "arity": arity, "depth": depth,
        "enumeration": {
            "pass": g.passed, "nodes": g.nodes, "successes": g.successes,
            "min_success_fidelity": g.min_success_fidelity,
            "min_oracle_fidelity": g.min_oracle_fidelity,
            "max_branch_probability_error": float(g.max_branch_probability_error),
        },
    }
    ok = g.passed
    if args.shots:
        stats = iteration_statistics(U, arity, args.shots, make_rng(seed)).to_dict()
        report["statistics"] = stats
        ok = ok and stats["p_within_band"] and stats["chi_square_passes"]
    report["pass"] = ok
    return report, ok


def _fail(code, message, exit_code):
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return exit_code


def main(argv=None):
    """Entry point; returns the process exit status."""
    try:
        args = build_parser().parse_args(argv)
        report, ok = _dispatch(args)
    except MeasQCError as exc:
        return _fail(exc.code, str(exc), exc.exit_code)
    except Exception as exc:  # anything else is a bug
        return _fail("internal_error", f"{type(exc).__name__}: {exc}", 2)
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if not ok:
        return _fail("check_failed", "a verification check failed; see report", 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
