"""Exception hierarchy.

Every error carries a ``code`` (its class name) so the CLI can emit a
machine-readable error object without a lookup table.
"""


class AlignError(Exception):
    """Base class for all domain errors raised by normalign."""

    @property
    def code(self):
        return type(self).__name__

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class WorldError(AlignError):
    pass


class DuplicateState(WorldError):
    pass


class DanglingTransition(WorldError):
    pass


class BadProbabilityGroup(WorldError):
    pass


class EmptyInitialSet(WorldError):
    pass


class UnknownState(WorldError):
    pass


class SchemaError(WorldError):
    """A state assignment does not fit the declared variable schema."""


class NoPaths(AlignError):
    pass


class SchemaMismatch(AlignError):
    """An expression references a variable or action the world does not declare."""


class DomainOverflow(AlignError):
    pass


class ExpressionError(AlignError):
    """Expression text is not in the supported grammar."""


class MissingPreference(AlignError):
    pass


class SpecError(AlignError):
    """A value or agent specification is malformed or violates its invariants."""


class FormatError(AlignError):
    """The world file cannot be parsed into the expected structure."""
