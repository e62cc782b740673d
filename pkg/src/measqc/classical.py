"""Classical counterpart of measurement-driven gate teleportation.

Resources are probability distributions over at most four bits, bits can be
stored, and bits can be measured at most four at a time.  To apply a gate
``g`` to input bits ``x``, prepare the string ``(y, g(y))`` with ``y``
uniform, then measure whether ``x == y``.  If so, the output bits hold
``g(x)``; if not, the attempt fails and is retried with a fresh resource.
For NOT, a failed attempt leaves ``NOT(y) = x`` in the output bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError

MAX_BITS = 4


def _bits(value, width):
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _index(bits):
    out = 0
    for b in bits:
        out = out << 1 | b
    return out


@dataclass(frozen=True)
class BitDistribution:
    """Distribution over ``num_bits``-bit strings, first bit most significant."""

    num_bits: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if self.num_bits > MAX_BITS:
            raise InputError(f"{self.num_bits} bits exceed the {MAX_BITS}-bit resource limit")
        if p.shape != (1 << self.num_bits,):
            raise InputError(f"need {1 << self.num_bits} probabilities, got {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise InputError("probabilities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def prob(self, bits):
        """Probability of the bit string ``bits`` (str like "01" or a sequence)."""
        return float(self.probabilities[_index(int(b) for b in bits)])

    def support(self):
        return [_bits(i, self.num_bits) for i in np.flatnonzero(self.probabilities)]

    def sample(self, rng):
        i = int(rng.choice(len(self.probabilities), p=self.probabilities))
        return _bits(i, self.num_bits)


@dataclass(frozen=True)
class ClassicalGateTable:
    """A total function from ``arity_in`` bits to ``arity_out`` bits."""

    arity_in: int
    arity_out: int
    table: dict

    def __post_init__(self):
        if self.arity_in not in (1, 2) or self.arity_out not in (1, 2):
            raise InputError("classical gates take 1 or 2 bits in and out")
        table = {}
        for x in itertools.product((0, 1), repeat=self.arity_in):
            try:
                y = tuple(int(b) for b in self.table[x])
            except KeyError:
                raise InputError(f"gate table has no entry for input {x}") from None
            if len(y) != self.arity_out or set(y) - {0, 1}:
                raise InputError(f"gate output {y} for input {x} is not {self.arity_out} bits")
            table[x] = y
        object.__setattr__(self, "table", table)

    def __call__(self, x):
        return self.table[tuple(x)]

    @classmethod
    def from_function(cls, fn, arity_in, arity_out):
        table = {}
        for x in itertools.product((0, 1), repeat=arity_in):
            y = fn(*x)
            table[x] = tuple(y) if isinstance(y, (tuple, list)) else (y,)
        return cls(arity_in, arity_out, table)


NOT = ClassicalGateTable.from_function(lambda a: 1 - a, 1, 1)
IDENTITY = ClassicalGateTable.from_function(lambda a: a, 1, 1)
AND = ClassicalGateTable.from_function(lambda a, b: a & b, 2, 1)
OR = ClassicalGateTable.from_function(lambda a, b: a | b, 2, 1)
XOR = ClassicalGateTable.from_function(lambda a, b: a ^ b, 2, 1)
NAND = ClassicalGateTable.from_function(lambda a, b: 1 - (a & b), 2, 1)
CNOT = ClassicalGateTable.from_function(lambda a, b: (a, a ^ b), 2, 2)
SWAP = ClassicalGateTable.from_function(lambda a, b: (b, a), 2, 2)

CLASSICAL_GATES = {
    "NOT": NOT, "ID": IDENTITY, "AND": AND, "OR": OR,
    "XOR": XOR, "NAND": NAND, "CNOT": CNOT, "SWAP": SWAP,
}


def classical_resource(gate):
    """Uniform distribution over the strings ``(y, gate(y))``."""
    width = gate.arity_in + gate.arity_out
    if width > MAX_BITS:
        raise InputError(f"resource for this gate needs {width} bits; limit is {MAX_BITS}")
    p = np.zeros(1 << width)
    for y, gy in gate.table.items():
        p[_index(y + gy)] += 1 / (1 << gate.arity_in)
    return BitDistribution(width, p)


class Attempt(NamedTuple):
    success: bool
    output: tuple


class RUSResult(NamedTuple):
    output: tuple
    attempts: int
    succeeded: bool


def attempt_outcome(x, gate, resource):
    """Result of measuring ``x == y`` against a sampled resource ``(y, g(y))``.

    On failure the output bits are the resource's ``g(y)``; for NOT that is
    the unchanged input.
    """
    x = tuple(int(b) for b in x)
    if len(x) != gate.arity_in:
        raise InputError(f"gate takes {gate.arity_in} input bit(s), got {len(x)}")
    resource = tuple(resource)
    y, out = resource[: gate.arity_in], resource[gate.arity_in :]
    # the two-outcome measurement of (x, y) only reveals whether they agree
    return Attempt(x == y, out)


def classical_attempt(x, gate, rng):
    """One attempt: sample ``(y, g(y))``, test ``x == y``, return the output bits."""
    return attempt_outcome(x, gate, classical_resource(gate).sample(rng))


def classical_rus(x, gate, max_attempts, rng):
    """Repeat :func:`classical_attempt` with fresh resources until success."""
    if max_attempts < 1:
        raise InputError("max_attempts must be >= 1")
    for attempt in range(1, max_attempts + 1):
        success, out = classical_attempt(x, gate, rng)
        if success:
            return RUSResult(out, attempt, True)
    return RUSResult(out, max_attempts, False)
