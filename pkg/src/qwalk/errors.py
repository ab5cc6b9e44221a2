"""Exception hierarchy.

All errors derive from :class:`QWalkError`; ``InputError`` subclasses are the
ones the command line maps to exit status 2.
"""


class QWalkError(Exception):
    pass


class InputError(QWalkError, ValueError):
    pass


class NotAProbability(InputError):
    pass


class DegenerateWalk(InputError):
    pass


class NonPositiveDrift(InputError):
    pass


class BadStart(InputError):
    pass


class RootFindingFailed(QWalkError):
    pass


class OnCut(QWalkError, ValueError):
    pass


class PoleOfBranch(QWalkError, ZeroDivisionError):
    pass


class CheckFailed(QWalkError):
    pass


class QuadratureNotConverged(QWalkError):
    pass


class AtPole(QWalkError, ZeroDivisionError):
    pass


class DenominatorZero(QWalkError, ZeroDivisionError):
    pass


class RegimeMismatch(QWalkError):
    pass


class WrongRegime(QWalkError):
    pass


class NotDeltaZero(QWalkError):
    pass


class OnSlit(QWalkError, ValueError):
    pass


class InconsistentH00(QWalkError):
    pass


class OrbitNotClosed(QWalkError):
    pass


class RadiusTooSmall(QWalkError):
    pass


class NewtonDiverged(QWalkError):
    pass


class NotConverged(QWalkError):
    pass


class ExcessCensoring(QWalkError):
    pass
