"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the CLI prints as
the prefix of its stderr line.
"""


class HmsError(Exception):
    code = "error"


class ValidationError(HmsError, ValueError):
    code = "validation"


class UnitError(ValidationError):
    code = "unit"


class SchemaVersionError(ValidationError):
    code = "schema-version"


class NoAttributedSamplesError(HmsError, ValueError):
    code = "no-attributed-samples"


class CalibrationError(HmsError, ValueError):
    code = "invalid-calibration"


class NotReferencedError(HmsError, KeyError):
    code = "not-referenced"

    def __str__(self):
        return str(self.args[0]) if self.args else self.code


class InfeasibleEvictionError(HmsError):
    code = "infeasible-eviction"


class SimulationError(HmsError):
    code = "simulation"


class DependencyViolation(SimulationError):
    code = "dependency-violation"


class CapacityViolation(SimulationError):
    code = "capacity-violation"
