"""Exception and warning types shared across the solvers."""


class QlsError(Exception):
    """Base class for all library-specific errors."""


class NonPositiveParameter(QlsError, ValueError):
    """A physical constant that must be strictly positive is zero or negative."""


class NotConverged(QlsError, RuntimeError):
    """An iterative computation did not settle to the requested tolerance."""


class SingularMatrix(QlsError, RuntimeError):
    """A composed transfer matrix is numerically singular.

    Should never occur for passive scatterers; signals runaway gain or a
    corrupted coupling value.
    """


class Diverged(QlsError, RuntimeError):
    """Field amplitudes blew up during a nonlinear recursion."""


class NoRoot(QlsError, RuntimeError):
    """A root scan found no sign change.

    Continuity guarantees a bracket for the transmission relations solved
    here, so this indicates a scan-resolution bug rather than missing physics.
    """


class BranchAmbiguity(QlsError, RuntimeError):
    """Two roots at adjacent grid points match the same predecessor.

    The power grid is too coarse near a fold; the caller should refine it.
    """


class StepFailure(QlsError, RuntimeError):
    """The adaptive integrator could not meet its error tolerance."""


class TrigOverflow(QlsError, OverflowError):
    """Complex trig argument too large in imaginary part to evaluate safely."""


class ConfigError(QlsError, ValueError):
    """A sweep configuration file is malformed or violates an invariant."""


class DenseArrayViolation(UserWarning):
    """The dense-array condition k*a < 0.2 is not met; results are suspect."""
