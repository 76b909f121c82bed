"""Simulation laboratory for contextual dynamic pricing from binary sale feedback."""

__version__ = "0.1.0"

from .errors import DegenerateFitError, InvalidSpecError, ProtocolError

__all__ = ["DegenerateFitError", "InvalidSpecError", "ProtocolError", "__version__"]
