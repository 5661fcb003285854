"""Shared exception types."""


class FormgamesError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(FormgamesError, ValueError):
    """A parameter is outside the documented domain (e.g. a=0 stabilizer)."""


class OutOfDomainError(FormgamesError, ValueError):
    """Input is outside the local regime of an operation (e.g. log far from I)."""


class InvalidLatticeError(FormgamesError, ValueError):
    """Basis is degenerate or not unimodular."""


class ResourceLimitError(FormgamesError, RuntimeError):
    """Request would exceed the desk-scale enumeration budget."""


class WrongVariantError(FormgamesError, ValueError):
    """A referee was asked to judge a move from a different game variant."""


class ParameterTooLargeError(FormgamesError, ValueError):
    """Thickening parameter breaks the embedding check."""


class NotTransversalError(FormgamesError, ValueError):
    """Submanifold fails the required transversality at tolerance."""


class ConfigurationError(FormgamesError, ValueError):
    """A strategy precondition failed before play began."""


class NoLegalMoveError(FormgamesError, RuntimeError):
    """A built-in player found no legal move at test tolerance."""
