"""Exception types shared across the pipeline (CLI maps them to exit codes)."""

from .radar_core import DomainError, RangeAxisError


class ValidationError(ValueError):
    """Inputs are well-formed but violate a contract (levels, grids, sensors)."""


class DecodeError(ValueError):
    """Corrupt binary file; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


class AmbiguityError(ValueError):
    """One region claimed by more than one sensor."""


__all__ = ["AmbiguityError", "DecodeError", "DomainError", "RangeAxisError", "ValidationError"]
