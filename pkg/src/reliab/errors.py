"""Exception hierarchy.

Everything raised on purpose derives from :class:`ReliabError`. The CLI maps
:class:`ConfigError` subclasses to exit code 2 and :class:`NumericalError`
subclasses to exit code 3.
"""


class ReliabError(Exception):
    pass


class ConfigError(ReliabError):
    pass


class NumericalError(ReliabError):
    pass


# distributions
class NonPositiveStd(ConfigError):
    pass


class NonPositiveLognormalMean(ConfigError):
    pass


class DomainError(NumericalError):
    pass


class DimensionMismatch(ReliabError, ValueError):
    pass


# limit states
class ExpressionSyntaxError(ConfigError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownVariable(ConfigError):
    pass


class UnknownProblem(ConfigError):
    pass


class EvalError(NumericalError):
    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (sample {index})"
        super().__init__(message)
        self.index = index


# surrogate
class DuplicateTrainingPoints(ConfigError):
    pass


class IllConditioned(NumericalError):
    pass


# FORM / SORM
class NoSignChange(NumericalError):
    """The limit state keeps one sign out to the bracketing radius.

    ``origin_safe`` tells which bound applies: the failure probability is
    below ``Phi(-radius)`` when True and above ``Phi(radius)`` otherwise.
    """

    def __init__(self, message, origin_safe, radius):
        super().__init__(message)
        self.origin_safe = origin_safe
        self.radius = radius


class MaxIterations(NumericalError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotConverged(NumericalError):
    pass


class DegenerateGradient(NumericalError):
    pass


class Dimension1(NumericalError):
    pass


class CurvatureSingularity(NumericalError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


# augmented space / quadrature
class UnsupportedDimension(ConfigError):
    pass


class OrderOutOfRange(ConfigError):
    pass


class NodeFailure(NumericalError):
    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


# cli
class UnknownMethod(ConfigError):
    pass
