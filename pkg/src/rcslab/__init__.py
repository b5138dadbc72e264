"""Desk-scale random circuit sampling: simulation, noise, XEB and spoofing."""

__version__ = "0.1.0"

from rcslab.errors import (
    CapacityError,
    CircuitParseError,
    RcsError,
    SizeError,
    UnachievableTargetError,
)

__all__ = [
    "__version__",
    "CapacityError",
    "CircuitParseError",
    "RcsError",
    "SizeError",
    "UnachievableTargetError",
]
