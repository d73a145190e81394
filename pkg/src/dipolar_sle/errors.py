"""Exception types raised by the numerical routines."""


class DipolarError(Exception):
    """Base class for all errors raised by this package."""


class PoleAtMarkedPoint(DipolarError, ValueError):
    pass


class OutOfDomain(DipolarError, ValueError):
    pass


class DegenerateMap(DipolarError, ValueError):
    pass


class InsufficientJet(DipolarError, ValueError):
    pass


class PoleAtDriving(DipolarError, ValueError):
    pass


class DiagonalSingularity(DipolarError, ValueError):
    pass


class BranchCutCrossing(DipolarError, ValueError):
    """The configuration sits on the declared branch cut of a chiral kernel."""


class Unsupported(DipolarError, NotImplementedError):
    pass


class InsertionSingularity(DipolarError, ValueError):
    pass


class ContourCollision(DipolarError, ValueError):
    """A contour of integration passes too close to another singular point."""


class NearMarkedPoint(DipolarError, ValueError):
    pass


class BadStep(DipolarError, ValueError):
    pass


class TraceInstability(DipolarError, ArithmeticError):
    pass


class SolverFailure(DipolarError, ArithmeticError):
    pass


class ConfigError(DipolarError, ValueError):
    pass
