"""Deterministic software-in-the-loop hexacopter stack simulator."""

__version__ = "0.1.0"
