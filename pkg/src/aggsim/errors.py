"""Exception types shared across the package.

Everything derives from AggsimError so callers (CLI, service) can map
domain failures to exit codes / HTTP statuses in one place.
"""


class AggsimError(Exception):
    """Base class for all domain errors."""


# --- parameter space ---------------------------------------------------

class OutOfDomain(AggsimError):
    pass


class PartitionError(AggsimError):
    pass


class NonMonotoneTime(AggsimError):
    pass


class EmptySamples(AggsimError):
    pass


class SampleOutsideInterval(AggsimError):
    pass


class HeterogeneousInterval(AggsimError):
    pass


class BundleArityError(AggsimError):
    pass


# --- aggregates / laws -------------------------------------------------

class NonFiniteValue(AggsimError):
    pass


class UnknownSymbol(AggsimError):
    pass


class UnknownLawError(AggsimError):
    pass


class PayloadSchemaError(AggsimError):
    pass


class SchemaError(AggsimError):
    """Monitoring record does not match the declared monitoring schema."""


# --- structure ----------------------------------------------------------

class UnknownLaw(AggsimError):
    """Composition law is not registered."""


class DanglingRelation(AggsimError):
    pass


class UnknownEntity(AggsimError):
    pass


class DuplicateEntity(AggsimError):
    pass


class UnknownComponent(AggsimError):
    pass


# --- synthesis ----------------------------------------------------------

class MultipleRoots(AggsimError):
    pass


class OrphanNode(AggsimError):
    pass


class DuplicateId(AggsimError):
    pass


class UnboundSlot(AggsimError):
    pass


class TypeMismatch(AggsimError):
    pass


class UnknownRule(AggsimError):
    pass


class InvariantViolation(AggsimError):
    pass


class BoundExceeded(AggsimError):
    pass


class UncoveredGoal(AggsimError):
    def __init__(self, identifier, *args):
        super().__init__(identifier, *args)
        self.identifier = identifier


class AmbiguousAssignment(AggsimError):
    pass


class InvalidCoupling(AggsimError):
    pass


# --- engine ---------------------------------------------------------------

class ModelValidationError(AggsimError):
    def __init__(self, findings):
        super().__init__("; ".join(findings))
        self.findings = list(findings)


class ScenarioValidationError(AggsimError):
    def __init__(self, findings):
        super().__init__("; ".join(findings))
        self.findings = list(findings)


class ZeroDelayCascade(AggsimError):
    pass


class RunFinished(AggsimError):
    pass


class PastTime(AggsimError):
    pass


class UnknownTarget(AggsimError):
    pass


class DigestMismatch(AggsimError):
    pass


# --- criteria -------------------------------------------------------------

class EmptyLog(AggsimError):
    pass


class ScopeMismatch(AggsimError):
    pass


class EnumerationLimitExceeded(AggsimError):
    pass


class UnknownParameterPath(AggsimError):
    pass


# --- documents / cli --------------------------------------------------------

class DocumentError(AggsimError):
    def __init__(self, findings):
        if isinstance(findings, str):
            findings = [findings]
        super().__init__("; ".join(findings))
        self.findings = list(findings)


class NoScenarioMatched(AggsimError):
    pass
