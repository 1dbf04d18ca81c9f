"""Exception types shared across the package."""


class JFXError(Exception):
    """Base class for all package errors."""


class AlgebraMismatch(JFXError):
    pass


class SingularElement(JFXError):
    pass


class NegativeEigenvalue(JFXError):
    pass


class NotIdempotent(JFXError):
    pass


class NotInClosedCone(JFXError):
    pass


class DegreeCapExceeded(JFXError):
    pass


class NonUniqueInvariant(JFXError):
    pass


class NotInWallachSet(JFXError):
    pass


class NotStructureElement(JFXError):
    pass


class NotConverged(JFXError):
    pass


class PoleInCoefficient(JFXError):
    pass


class QuadratureNotConverged(JFXError):
    pass


class PoleAtLambda(JFXError):
    pass


class RuleNotCalibrated(JFXError):
    pass


class UnsupportedGroup(JFXError):
    pass


class NotSphericalExpansion(JFXError):
    pass


class ExpansionFailed(JFXError):
    pass


class RankMismatch(JFXError):
    pass
