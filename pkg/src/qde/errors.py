"""Exception hierarchy.

Three families map onto the CLI exit codes: configuration problems (2),
numerical-contract violations (3) and resource caps (4).
"""


class QDEError(Exception):
    """Base class for all errors raised by this package."""


class ConfigInvalid(QDEError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ContractViolation(QDEError, ValueError):
    """A numerical precondition or postcondition does not hold."""


class NotSquare(ContractViolation):
    pass


class NotHermitian(ContractViolation):
    pass


class InvalidDensity(ContractViolation):
    pass


class NotUnitary(ContractViolation):
    pass


class OddDimension(ContractViolation):
    pass


class NotDivisible(ContractViolation):
    pass


class DimensionMismatch(ContractViolation):
    pass


class MissingPoint(ContractViolation):
    pass


class InvalidPartition(ContractViolation):
    pass


class ResourceLimit(QDEError):
    """A requested computation exceeds a configured size or memory cap."""

    def __init__(self, parameter, value, limit, note=""):
        self.parameter = parameter
        self.value = value
        self.limit = limit
        msg = f"{parameter}={value} exceeds limit {limit}"
        super().__init__(f"{msg} ({note})" if note else msg)


class CapExceeded(ResourceLimit):
    pass


class MemoryBudget(ResourceLimit):
    pass
