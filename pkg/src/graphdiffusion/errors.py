"""Exception hierarchy.

Two families: ``ValidationError`` for malformed input (the CLI maps it to
exit code 2) and ``DomainError`` for well-formed input that an operation
cannot handle (exit code 1).
"""


class GraphDiffusionError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GraphDiffusionError, ValueError):
    pass


class NegativeWeight(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class AsymmetricInput(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class UnknownVertex(ValidationError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NegativeKilling(ValidationError):
    pass


class NonPositiveMeasure(ValidationError):
    pass


class InvalidExhaustion(ValidationError):
    pass


class DomainError(GraphDiffusionError):
    pass


class IsolatedUnkilledVertex(DomainError):
    pass


class SizeLimit(DomainError):
    pass


class NotOrderIso(DomainError):
    pass


class NotConstantMultiplier(DomainError):
    pass


class NotConnected(DomainError):
    pass


class SearchBudgetExceeded(DomainError):
    pass


class NotSuperharmonic(DomainError):
    pass


class NotPositive(DomainError):
    pass


class NotBijective(DomainError):
    pass


class LpInfeasible(DomainError):
    pass


class SingularSystem(DomainError):
    pass


class HypothesisViolated(DomainError):
    pass


class InconsistentVerdict(DomainError):
    """Two independent routes to the same fact disagreed."""
