"""Exception types shared across the toolkit."""


class LegsurfError(Exception):
    """Base class for all package-specific errors."""


class UsageError(LegsurfError, ValueError):
    """The caller violated an interface contract (bad orders, unknown names, ...)."""


class OrderMismatchError(UsageError):
    """Binary jet operation on jets of different truncation orders."""


class SingularJetError(LegsurfError, ZeroDivisionError):
    """Jet division by a jet whose constant term is (numerically) zero."""


class DegenerateSpanError(LegsurfError):
    """Vectors that were supposed to span a symplectic complement do not."""


class RankDeficientError(LegsurfError):
    """Chart jets fail the immersion test at the base point."""


class LegendrianResidualError(LegsurfError):
    """A chart handed to the frame ladder is not Legendrian to tolerance."""

    def __init__(self, residual, tol):
        super().__init__(f"legendrian residual {residual:.3e} exceeds {tol:.1e}")
        self.residual = residual
        self.tol = tol


class DegenerateSecondFundamentalFormError(LegsurfError):
    """The cubic form has a repeated root; the surface point is not generic."""


class IncompleteDerivativeTableError(UsageError):
    """d_squared_check needs the derivative of a bare parameter."""


class UnregisteredCoefficientError(UsageError):
    """An expression refers to a name the structure context does not know."""


class MultipleFactorError(LegsurfError):
    """A binary form required to be squarefree has a repeated factor."""


class DegenerateDivisorError(LegsurfError):
    """A blown-up divisor collapses to a single point under the map."""

    def __init__(self, point):
        super().__init__("divisor image is a single point")
        self.point = point


class EquivalenceFailureError(LegsurfError):
    """No conformal block scaling matches the two maps on the sample set."""


class IntegrabilityViolationError(LegsurfError):
    """Deformation flow requested on a base that fails the closure conditions."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class FlowConvergenceError(LegsurfError):
    """Step halving stopped making the integrated flow any more accurate."""

    def __init__(self, achieved, wanted):
        super().__init__(
            f"flow integration stalled at error {achieved:.3e} (wanted {wanted:.1e})"
        )
        self.achieved = achieved
        self.wanted = wanted
