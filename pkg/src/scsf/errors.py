"""Exception hierarchy shared by all scsf modules."""


class ScsfError(Exception):
    """Base class for all errors raised by scsf."""


class DimensionError(ScsfError, ValueError):
    """Mode cutoff or grid sizes are incompatible."""


class ValidationError(ScsfError, ValueError):
    """A noise spec or configuration violates a structural requirement."""


class ConfigError(ValidationError):
    """Invalid simulation/experiment configuration.

    ``field`` names the offending configuration key when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class EvaluationError(ScsfError, ValueError):
    """Non-finite input passed to a field operator."""


class SolverError(ScsfError, RuntimeError):
    """Newton iteration for the resolvent failed to converge."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class BlowUpError(ScsfError, RuntimeError):
    """State became non-finite, or a step failed, during time integration."""

    def __init__(self, message, step=None, time=None, seed=None, stream_id=None):
        parts = [message]
        if step is not None:
            parts.append(f"step={step}")
        if time is not None:
            parts.append(f"t={time:.6g}")
        if seed is not None:
            parts.append(f"seed={seed}")
        if stream_id is not None:
            parts.append(f"stream={stream_id}")
        super().__init__(", ".join(parts))
        self.step = step
        self.time = time
        self.seed = seed
        self.stream_id = stream_id


class StabilizationError(ScsfError, RuntimeError):
    """An ergodic run did not reach a stabilized regime; averages refused."""
