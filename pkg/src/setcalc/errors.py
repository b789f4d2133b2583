"""Exception hierarchy shared by all setcalc modules."""


class SetCalcError(Exception):
    """Base class for every error raised by setcalc."""


class UniverseMismatchError(SetCalcError, ValueError):
    """Two subsets from different ground sets were combined."""


class UniverseTooLargeError(SetCalcError, ValueError):
    """Exhaustive enumeration was requested on a universe above the cap."""


class InconclusiveError(SetCalcError):
    """A finite horizon was not long enough to settle a limit."""


class ZeroDenominatorError(SetCalcError, ZeroDivisionError):
    """A difference quotient has m(A Δ B) == m(A); the variation is inadmissible."""


class NotContinualError(SetCalcError):
    """An operation that requires a continual set function got one not marked as such."""


class NoWitnessError(SetCalcError):
    """No mean-value parameter theta in [0, 1] reproduces the difference quotient."""


class MinimalityUnverifiedError(SetCalcError):
    """The claimed minimizer was beaten during the precondition scan."""


class PartialFractalOverlapError(SetCalcError, ValueError):
    """Two fractal components overlap without being identical."""


class SingularGramError(SetCalcError, ArithmeticError):
    """The elementary symmetric basis is linearly dependent for the given values."""


class NonConvergentError(SetCalcError, ArithmeticError):
    """A truncated series did not settle below tolerance."""


class UnboundedIntegrandError(SetCalcError, ValueError):
    """The integrand is not bounded on the integration set."""


class FractalIntegrationError(SetCalcError, ValueError):
    """Integration over fractal components is not defined."""


class MultivaluedCurveError(SetCalcError, ValueError):
    """The curve (m(A), F(A)) is not single-valued on the requested range."""
