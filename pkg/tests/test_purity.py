"""The runtime never evolves a register unitarily.

Checked two ways: statically, by walking the source of every runtime module,
and dynamically, by tracing every call made while a compiled program runs.
"""

import ast
import inspect
import sys

import numpy as np

import measqc.batch
import measqc.compiler
import measqc.core
import measqc.measurement
import measqc.resources
import measqc.teleport
from measqc.compiler import NAMED_GATES, Circuit, GateSpec, execute_program, lower_circuit
from measqc.core import haar_unitary

RUNTIME_MODULES = [
    measqc.measurement, measqc.resources, measqc.teleport, measqc.compiler, measqc.batch,
]

# apply_unitary may only build fixed measurement bases from textbook states
ALLOWED_APPLY_SITES = {("measqc.teleport", "bell_basis")}

# the only functions that may construct a new register state
REGISTER_FACTORIES = {
    ("measqc.measurement", "Register"): {
        "empty", "from_state", "prepare_zero", "_collapse", "discard_disentangled",
    },
    ("measqc.batch", "RegisterBatch"): {"tile", "take", "prepare_zero", "measure", "discard"},
}


def _calls(module):
    """Yield ``(enclosing_function, called_name)`` for every call in ``module``."""
    tree = ast.parse(inspect.getsource(module))

    def walk(node, fn):
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                walk(child, child.name)
                continue
            if isinstance(child, ast.Call):
                f = child.func
                name = f.id if isinstance(f, ast.Name) else getattr(f, "attr", None)
                yield fn, name
            yield from walk(child, fn)

    yield from walk(tree, "<module>")


def static_violations():
    bad = []
    for mod in RUNTIME_MODULES:
        for fn, name in _calls(mod):
            if name == "apply_unitary" and (mod.__name__, fn) not in ALLOWED_APPLY_SITES:
                bad.append(f"{mod.__name__}.{fn} calls apply_unitary")
            for (home, cls), allowed in REGISTER_FACTORIES.items():
                if name in (cls, "cls") and mod.__name__ == home and fn not in allowed:
                    if name == cls or fn in ("empty", "from_state"):
                        bad.append(f"{mod.__name__}.{fn} constructs {cls}")
                elif name == cls and mod.__name__ != home:
                    bad.append(f"{mod.__name__}.{fn} constructs {cls}")
    return bad


def traced_run(fn):
    """Run ``fn`` and record who called apply_unitary and who built registers."""
    apply_code = measqc.core.apply_unitary.__code__
    watched = {
        measqc.measurement.prepare_zero.__code__: "prepare_zero",
        measqc.measurement._collapse.__code__: "_collapse",
        measqc.measurement.discard_disentangled.__code__: "discard_disentangled",
        measqc.measurement.Register.from_state.__func__.__code__: "from_state",
        measqc.measurement.Register.empty.__func__.__code__: "empty",
    }
    apply_callers, transitions = [], []

    def profiler(frame, event, arg):
        if event != "call":
            return
        if frame.f_code is apply_code:
            caller = frame.f_back
            while caller.f_code.co_name.startswith("<") and caller.f_code.co_name != "<module>":
                caller = caller.f_back  # comprehension frames on older Pythons
            apply_callers.append((caller.f_globals.get("__name__"), caller.f_code.co_name))
        elif frame.f_code in watched:
            transitions.append(watched[frame.f_code])

    measqc.teleport.bell_basis.cache_clear()
    measqc.teleport.bell2_basis.cache_clear()
    sys.setprofile(profiler)
    try:
        result = fn()
    finally:
        sys.setprofile(None)
    return result, apply_callers, transitions


def compiled_run():
    rng = np.random.default_rng(0)
    circuit = Circuit(3, (
        GateSpec.named("H", 0), GateSpec.named("CNOT", 0, 1),
        GateSpec("U", (2, 1), haar_unitary(4, rng)), GateSpec.named("T", 2),
    ), "001")
    return execute_program(lower_circuit(circuit, 1e-3), rng)


def test_no_runtime_module_applies_unitaries():
    assert static_violations() == []


def test_traced_execution_only_measures():
    run, apply_callers, transitions = traced_run(compiled_run)
    assert run.succeeded
    assert set(apply_callers) <= ALLOWED_APPLY_SITES
    assert set(transitions) == {"empty", "prepare_zero", "_collapse", "discard_disentangled"}
    assert "from_state" not in transitions


def test_static_check_catches_a_violation():
    src = "def sneaky(reg, U):\n    return apply_unitary(reg.state, U, [0])\n"
    tree = ast.parse(src)
    names = [n.func.id for n in ast.walk(tree) if isinstance(n, ast.Call)]
    assert "apply_unitary" in names
