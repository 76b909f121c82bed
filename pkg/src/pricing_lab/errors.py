"""Shared exception types."""


class InvalidSpecError(ValueError):
    """A declarative spec (noise, instance, grid, run config) violates its contract."""


class ProtocolError(RuntimeError):
    """act/observe called out of order on a pricing policy."""


class DegenerateFitError(ValueError):
    """Power-law fit input admits no slope estimate."""
