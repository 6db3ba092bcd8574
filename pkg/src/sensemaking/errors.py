"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad input, the CLI
exits 1) and ``InferenceError`` (a well-formed model that cannot answer
the question asked, the CLI exits 2).
"""


class SensemakingError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SensemakingError):
    pass


class InferenceError(SensemakingError):
    pass


# -- graphical model ---------------------------------------------------------
class CycleDetected(ValidationError):
    pass


class MissingCpt(ValidationError):
    pass


class DuplicateVariable(ValidationError):
    pass


class UnknownParent(ValidationError):
    pass


class RowNotNormalized(ValidationError):
    def __init__(self, message, path=None, total=None):
        super().__init__(message)
        self.path = path
        self.total = total


class UnknownVariable(ValidationError):
    pass


class UnknownState(ValidationError):
    pass


class ImpossibleEvidence(InferenceError):
    pass


# -- frames ------------------------------------------------------------------
class UnknownElement(ValidationError):
    pass


class SelfRelation(ValidationError):
    pass


class DuplicateElement(ValidationError):
    pass


class MissingCptAssignment(ValidationError):
    pass


class ParentMismatch(ValidationError):
    pass


# -- memory network ----------------------------------------------------------
class DuplicateMemory(ValidationError):
    pass


class SelfIncompatibility(ValidationError):
    pass


class EmptyMemory(ValidationError):
    pass


class UnknownUnit(ValidationError):
    pass


# -- loop --------------------------------------------------------------------
class ConflictingEvidence(InferenceError):
    pass


class VariableMismatch(ValidationError):
    pass


# -- oracle ------------------------------------------------------------------
class TooLarge(InferenceError):
    pass


# -- scenario files ----------------------------------------------------------
class Malformed(ValidationError):
    pass


class SchemaViolation(ValidationError):
    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class UnknownReference(ValidationError):
    pass
