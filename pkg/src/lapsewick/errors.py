"""Exception hierarchy shared by all modules."""


class LapseWickError(Exception):
    """Base class for every error raised by the package."""


class DegenerateMetricError(LapseWickError):
    """Spatial metric is singular or not positive definite."""


class InvalidTripleError(LapseWickError):
    """An ADM triple violates one of its invariants."""


class EvaluationError(LapseWickError):
    """A map or derivative produced non-finite values."""


class BlockInversionError(LapseWickError):
    """Jacobian blocks could not be inverted at some point."""


class OrientationError(LapseWickError):
    """A map has non-positive Jacobian determinant somewhere."""


class CompositionError(LapseWickError):
    """Two maps cannot be composed (dimension or domain mismatch)."""


class DegenerateLeafError(LapseWickError):
    """The image leaves are null or timelike (radicand too small)."""


class BranchError(LapseWickError):
    """A complex radicand touched the branch cut of the square root."""


class DoubleRotationError(LapseWickError):
    """Attempt to rotate a lapse that is already rotated."""


class InversionError(LapseWickError):
    """A closed-form inverse map is required but unavailable."""


class PreconditionError(LapseWickError):
    """Input violates a documented precondition (e.g. negative potential)."""


class AdmissibilityError(PreconditionError):
    """Potential is negative on the sampled range."""


class EigensolverError(LapseWickError):
    """Dense eigensolver failed to converge."""


class ContractError(LapseWickError):
    """Two operators are not comparable (e.g. different weights)."""


class NumericalDifferentiationError(LapseWickError):
    """Richardson extrapolation did not converge."""


class DomainError(LapseWickError):
    """Argument outside the mathematical domain of a function."""


class QuadratureError(LapseWickError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConfigError(LapseWickError):
    """Suite configuration could not be parsed or validated."""


class OutputError(LapseWickError):
    """Artifacts could not be written."""


def point_label(index, t=None, x=None):
    """Format a grid point for error messages."""
    idx = tuple(int(i) for i in index) if index is not None else ()
    parts = [f"index={idx}"]
    if t is not None:
        parts.append(f"t={float(t):.6g}")
    if x is not None:
        xs = ", ".join(f"{float(v):.6g}" for v in x)
        parts.append(f"x=({xs})")
    return " ".join(parts)
