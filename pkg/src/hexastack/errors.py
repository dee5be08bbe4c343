"""Exception types shared across the simulator."""

from __future__ import annotations


class HexastackError(Exception):
    """Base class for all simulator errors."""


# --- configuration / scenario ---

class ParseError(HexastackError):
    """Malformed config or scenario text.  Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(HexastackError):
    """Structurally valid input with an illegal value.  Names the key."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


# --- motor plant ---

class CurrentLimitFault(HexastackError):
    """Phase current exceeded the hard abort threshold (1.5x rated max)."""


class NonFiniteState(HexastackError):
    """A state variable left the finite-float domain."""


# --- motor controller firmware ---

class InvalidSector(HexastackError):
    """Commutation sector outside 0..5."""


class StartupFailure(HexastackError):
    """Sensorless startup did not reach closed loop within the allowed time."""


class UnderspeedFault(HexastackError):
    """Commanded speed is below the minimum for sensorless operation."""


# --- interconnect ---

class CrcError(HexastackError):
    """Frame checksum mismatch."""


class MalformedLength(HexastackError):
    """Frame length field inconsistent with the payload or opcode."""


class NoAckError(HexastackError):
    """No device acknowledged the addressed transaction."""


class BusBusy(HexastackError):
    """A transaction was started while another was still in flight."""


# --- flight controller ---

class NotStationary(HexastackError):
    """Heading reset requested while the vehicle was rotating."""


class NoOscillation(HexastackError):
    """Relay autotune failed to produce a stable limit cycle."""


class DisarmedError(HexastackError):
    """Control step requested while disarmed."""


# --- airframe / calibration / harness ---

class CalibrationFailure(HexastackError):
    """Propulsion calibration could not satisfy its anchors."""


class SimulationFault(HexastackError):
    """A fault inside a simulated component ended the run."""


class EmptyLog(HexastackError):
    """Report requested on a telemetry log with no rows."""
