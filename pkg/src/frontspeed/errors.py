"""Exception hierarchy shared by all modules.

Each exception carries an ``exit_code`` used by the command-line entry point.
"""


class FrontSpeedError(Exception):
    exit_code = 1


class ConfigurationError(FrontSpeedError, ValueError):
    exit_code = 1


class UnsupportedError(FrontSpeedError, NotImplementedError):
    exit_code = 1


class NonConvergenceError(FrontSpeedError, RuntimeError):
    exit_code = 2

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DegenerateProfileError(FrontSpeedError, ValueError):
    exit_code = 2


class HypothesisViolation(FrontSpeedError):
    """A spectral or symmetry hypothesis required by a computation fails."""

    exit_code = 3


class NonTransversalityError(HypothesisViolation):
    pass


class SimulationBlowUp(FrontSpeedError, FloatingPointError):
    exit_code = 4

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class TrackingError(FrontSpeedError, RuntimeError):
    exit_code = 4


class StageError(FrontSpeedError):
    """Failure inside one stage of a multi-stage pipeline."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


class NormalizationError(FrontSpeedError, ValueError):
    """Adjoint function does not satisfy <psi, phi'> = 1."""

    exit_code = 3
