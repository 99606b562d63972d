"""
Error types raised by the toolkit.

Every contract violation derives from SVFError so the CLI can map it to a
single exit code.
"""


class SVFError(Exception):
    """Base class for every contract violation in the toolkit."""


class ConfigError(SVFError):
    """An environment setting could not be parsed."""


class DocumentError(SVFError):
    """An input document is malformed."""


class BlockShapeError(SVFError, ValueError):
    """Blocks do not match the algebra they are supposed to live in."""


# Linear algebra kernel
class NonFiniteError(SVFError):
    pass


class NotHermitianError(SVFError):
    pass


class NotPositiveError(SVFError):
    pass


class BadScalarFunctionError(SVFError):
    pass


# Projections and classes
class NotProjectionError(SVFError):
    pass


class RankOutOfRangeError(SVFError):
    pass


class VariantMismatchError(SVFError):
    pass


class NegativeClassError(SVFError):
    pass


class NotNestedError(SVFError):
    pass


class RankGapViolatedError(SVFError):
    pass


class ChainNotIncreasingError(SVFError):
    pass


class TopMismatchError(SVFError):
    pass


class RankOverflowError(SVFError):
    pass


class SubordinationViolationError(SVFError):
    """A pair with ||p - pq|| < 1 whose ranks are not dominated."""


class OracleDisagreementError(SVFError):
    """The closed form and the finite-spectrum formula disagree."""


class ToleranceNotMetError(SVFError):
    pass


# Step functions
class EmptyPartitionError(SVFError):
    pass


class NotInDomainError(SVFError):
    pass


class DomainMismatchError(SVFError):
    pass


class JumpNotInDomainError(SVFError):
    pass


class TargetContractError(SVFError):
    """A target function breaks its declared shape (monotonicity, jumps)."""


class BadIntervalError(SVFError):
    pass


class NonTerminationError(SVFError):
    pass


class DoesNotVanishError(SVFError):
    pass


# Realization
class BadNormalizationError(SVFError):
    pass
