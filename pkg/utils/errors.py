"""Exception types shared by the solver, study driver and CLI.

The CLI maps ``ConfigError`` (and its subclasses) to exit code 1 and
``NumericalFailure`` to exit code 2.
"""

from __future__ import annotations

from typing import Optional


class HarnessError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HarnessError, ValueError):
    """Invalid configuration or violated precondition."""


class GridError(ConfigError):
    """Invalid grid parameters (odd nx, too few y nodes, stretch out of range)."""


class IncompatibleInitialCondition(ConfigError):
    """Initial data violates the wall conditions of the selected system."""

    def __init__(self, trace: str, norm: float):
        self.trace = trace
        self.norm = float(norm)
        super().__init__(f"initial condition violates wall condition {trace}: max trace = {self.norm:.3e}")


class NumericalFailure(HarnessError, RuntimeError):
    """NaN/Inf in the state or a CFL violation; ``t_last`` is the last valid time."""

    def __init__(self, message: str, t_last: Optional[float] = None):
        self.t_last = t_last
        if t_last is not None:
            message = f"{message} (last valid t = {t_last:.6g})"
        super().__init__(message)


class SnapshotError(HarnessError, ValueError):
    """Corrupt snapshot header, payload size mismatch or unsupported schema version."""


class TimeGridMismatch(HarnessError, ValueError):
    """Two snapshot series do not share the same output times."""
