"""Exception types raised across the package."""


class Gamma2Error(Exception):
    """Base class for all package errors."""


class NonFiniteEvaluation(Gamma2Error):
    pass


class StiffnessFailure(Gamma2Error):
    pass


class NoBracket(Gamma2Error):
    pass


class KinkAtMass(Gamma2Error):
    pass


class NonIntegrableTail(Gamma2Error):
    pass


class HypothesisViolation(Gamma2Error):
    pass


class UnsupportedSet(Gamma2Error):
    pass


class MassOutOfRange(Gamma2Error):
    pass


class UnresolvedEpsilon(Gamma2Error):
    pass


class LeftLocalityBall(Gamma2Error):
    pass


class NoConvergence(Gamma2Error):
    pass


class RootCountChanged(Gamma2Error):
    pass


class ConfigError(Gamma2Error):
    pass
