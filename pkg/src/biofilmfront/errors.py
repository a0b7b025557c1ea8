"""Exception types with stable machine-readable error codes.

Every failure raised by this package carries a ``code`` attribute (a short
upper-case token such as ``"ZERO_PIVOT"``) so that callers and command-line
wrappers can branch on failure class without parsing message text.
"""

from __future__ import annotations


class SolverError(Exception):
    """Base class for all package errors.

    Parameters
    ----------
    message : str
        Human-readable description.
    code : str
        Stable machine-readable token identifying the failure class.
    """

    def __init__(self, message: str, *, code: str = "ERROR"):
        super().__init__(message)
        self.code = code


class ValidationError(SolverError):
    """Invalid model data or parameters (nonpositive rates, shape mismatch...)."""


class GridError(SolverError):
    """Grid construction or interpolation domain failures."""


class AssemblyError(SolverError):
    """Tridiagonal assembly rejected (loss of diagonal dominance / M-matrix sign)."""


class LinearSolveError(SolverError):
    """Tridiagonal elimination hit a zero pivot or produced non-finite values."""


class ThicknessCollapse(SolverError):
    """Film thickness fell to the washout floor during a boundary update.

    Attributes
    ----------
    thickness : float
        The offending thickness value.
    """

    def __init__(self, message: str, *, thickness: float):
        super().__init__(message, code="THICKNESS_COLLAPSE")
        self.thickness = thickness


class PicardDivergence(SolverError):
    """Per-step fixed-point iteration failed to contract.

    Attributes
    ----------
    residual_history : list[float]
        Sup-norm residuals of every sweep performed before giving up.
    """

    def __init__(self, message: str, *, residual_history):
        super().__init__(message, code="PICARD_DIVERGED")
        self.residual_history = list(residual_history)


class EnvelopeViolation(SolverError):
    """Recorded energy exceeded the dissipation envelope.

    Attributes
    ----------
    time : float
        First offending time.
    excess : float
        Relative overshoot ``E/envelope - 1`` at that time.
    """

    def __init__(self, message: str, *, time: float, excess: float):
        super().__init__(message, code="ENVELOPE_VIOLATED")
        self.time = time
        self.excess = excess


class ConfigError(SolverError):
    """Configuration parsing/validation failure (codes PARSE_ERROR,
    UNKNOWN_KEY, SCHEMA_VIOLATION)."""


class OutputError(SolverError):
    """Filesystem failure while writing run outputs."""

    def __init__(self, message: str):
        super().__init__(message, code="IO_ERROR")


class OrderRegression(SolverError):
    """A convergence study produced an observed order below its floor.

    Attributes
    ----------
    orders : dict[str, float]
        Observed orders keyed by study case name.
    """

    def __init__(self, message: str, *, orders):
        super().__init__(message, code="ORDER_REGRESSION")
        self.orders = dict(orders)
