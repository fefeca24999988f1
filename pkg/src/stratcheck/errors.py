"""Exception types shared across the package.

Parse and validation errors carry a 1-based (line, col) position pointing at
the offending token so the CLI can print clickable diagnostics.
"""


class StratcheckError(Exception):
    """Base class for every error raised by this package."""


class SpecError(StratcheckError):
    """An error located in an input text (model file, formula, or relation)."""

    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(str(self))

    def __str__(self):
        if self.line is None:
            return self.message
        if self.col is None:
            return "line %d: %s" % (self.line, self.message)
        return "line %d, col %d: %s" % (self.line, self.col, self.message)


class SpecSyntaxError(SpecError):
    """Malformed input: unexpected token, missing section, bad line shape."""


class DuplicateDeclaration(SpecError):
    """The same name or the same (source, action) transition declared twice."""


class UnknownReference(SpecError):
    """A name is used that no declaration introduces."""


class NestedModality(SpecError):
    """A formula contains a coalition modality inside another one."""


class ArityMismatch(SpecError):
    """A relation descriptor's length differs from the model's agent count."""


class UnknownLocalState(SpecError):
    """A relation descriptor names a local state its agent does not have."""


class PersistentClearedError(SpecError):
    """A transition effect assigns false to a persistent proposition."""


class EmptyAgent(SpecError):
    """An agent declaration introduces no local states."""


class NotEnabled(StratcheckError):
    """apply_action was called with an action not enabled in the state."""


class StateLimitExceeded(StratcheckError):
    """Global-model construction crossed the configured state cap."""


class StrategySpaceExceeded(StratcheckError):
    """Strategy enumeration crossed the configured strategy cap."""


class VerificationTimeout(StratcheckError):
    """A verification run crossed its wall-clock budget."""
