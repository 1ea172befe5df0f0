"""Exception hierarchy shared by every module of the package."""


class ComplementarityError(Exception):
    """Base class for all errors raised by :mod:`complcharge`."""


class InvalidArgumentError(ComplementarityError, ValueError):
    pass


class SingularKernelError(ComplementarityError, ArithmeticError):
    """A Coulomb kernel was evaluated at coincident (shifted) points with no softening."""


class UnsupportedDomainError(ComplementarityError, ValueError):
    pass


class NumericalFailureError(ComplementarityError, ArithmeticError):
    """An iterative solver stopped before reaching its tolerance.

    ``off_norm`` holds the achieved off-diagonal Frobenius norm.
    """

    def __init__(self, message, off_norm=None):
        super().__init__(message)
        self.off_norm = off_norm


class InvalidPairError(ComplementarityError, ValueError):
    """Eigen indices of a quadruple collide or fall outside the spectrum."""


class IndefiniteModeError(ComplementarityError, ValueError):
    """A selected eigenvalue is not strictly negative."""


class InadmissibleAlphaError(ComplementarityError, ValueError):
    """Perturbation amplitude outside the open interval (0, alpha_max)."""
