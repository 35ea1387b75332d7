"""Exception types shared across the package."""


class FitpickError(Exception):
    """Base class for all package errors."""


class ShapeError(FitpickError):
    """Tensor/vector dimensions do not match what an operation requires."""


class StateError(FitpickError):
    """An operation was called in the wrong order (e.g. backward before forward)."""


class TrainingError(FitpickError):
    """Training produced non-finite values or diverged."""


class LoadError(FitpickError):
    """An artifact on disk is missing, malformed, or internally inconsistent."""


class ContractViolation(FitpickError):
    """A caller broke an operation precondition (e.g. repeating an action)."""
