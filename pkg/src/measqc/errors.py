"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` and an ``exit_code``
used by the command-line front end: 1 for bad input, 2 for a violated
internal invariant.
"""


class MeasQCError(Exception):
    code = "error"
    exit_code = 2


class InputError(MeasQCError):
    """Malformed user input (bad circuit document, bad flag value)."""

    code = "input_error"
    exit_code = 1


class SchemaError(InputError):
    code = "schema_violation"


class NotUnitaryError(InputError):
    code = "not_unitary"


class DimensionError(InputError):
    code = "dimension_mismatch"


class TargetError(InputError):
    code = "invalid_targets"


class CapacityError(MeasQCError):
    """Register or product state would exceed the configured qubit limit."""

    code = "capacity_exceeded"
    exit_code = 1


class InvalidStateError(MeasQCError):
    code = "invalid_state"


class InvalidBasisError(MeasQCError):
    code = "invalid_basis"


class MeasurementLimitError(MeasQCError):
    """More than four qubits in one measurement: forbidden by the model."""

    code = "measurement_too_wide"


class NumericalCorruptionError(MeasQCError):
    code = "numerical_corruption"


class EntanglementError(MeasQCError):
    """Qubits asked to be discarded are still entangled with the rest."""

    code = "entanglement_detected"
