"""Exception types shared across the toolkit."""


class TwirlkitError(Exception):
    """Base class for all toolkit errors."""


class NotTracePreserving(TwirlkitError):
    """Kraus set does not satisfy sum(K^dag K) = I within tolerance."""


class NotUnitary(TwirlkitError):
    """Matrix is not unitary within tolerance."""


class DimensionMismatch(TwirlkitError):
    """Vector or matrix dimensions are inconsistent."""


class ParamOutOfRange(TwirlkitError):
    """A channel or noise parameter lies outside its admissible range."""


class MixedModulus(TwirlkitError):
    """Group elements with incompatible qubit count or phase modulus."""


class TooLarge(TwirlkitError):
    """Group too large for enumeration and lacks usable structure."""


class CapExceeded(TwirlkitError):
    """Closure enumeration exceeded the element cap."""


class FitDiverged(TwirlkitError):
    """Nonlinear least-squares refinement failed to reduce the residual."""
