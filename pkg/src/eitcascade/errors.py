"""Exception types raised across the package."""


class EITError(Exception):
    """Base class for all package errors."""


class InvalidInputError(EITError, ValueError):
    """Non-finite or out-of-range input to a model function."""


class DegenerateInputError(EITError, ValueError):
    """Input for which the requested quantity is undefined (e.g. zero vector)."""


class IntegrationError(EITError, RuntimeError):
    """A density-matrix invariant failed after a time step.

    Attributes
    ----------
    cell : int
        Spatial index of the first offending cell.
    time : float
        Simulation time (μs) at which the check failed.
    """

    def __init__(self, message: str, cell: int, time: float):
        super().__init__(f"{message} (cell {cell}, t = {time:.6g} us)")
        self.cell = cell
        self.time = time


class StabilityError(EITError, ValueError):
    """Time step exceeds the explicit-integration stability bound."""


class GridMismatchError(EITError, ValueError):
    """Arrays that must share a grid do not."""


class UndefinedEfficiencyError(EITError, ZeroDivisionError):
    """Efficiency requested for an input with zero energy."""


class ConfigurationError(EITError, ValueError):
    """Inconsistent experiment configuration (timing, windows, sections)."""
