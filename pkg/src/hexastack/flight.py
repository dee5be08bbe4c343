"""Flight-controller core: command arbitration and the 500 Hz step.

Each control step runs the three axis PIDs against the fused attitude,
mixes the outputs into six rpm setpoints, saturates them, and emits one
speed frame per motor controller.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import mixer, pid
from .attitude import AttitudeState, heading
from .errors import DisarmedError, ValidationError
from .frames import CommandFrame, wrap_angle

CONTROL_DT = 0.002          # 500 Hz control rate
MANUAL_FRESH_S = 0.2
MOTOR_ADDRESSES = (1, 2, 3, 4, 5, 6)

# motor floor matches the controllers' sensorless minimum; ceiling sits
# just under the no-load speed at full battery
DEFAULT_OMEGA_MIN = 1000.0
DEFAULT_OMEGA_MAX = 8000.0


class CommandSource(enum.Enum):
    MISSION = "mission"
    MANUAL = "manual"
    HOVER_HOLD = "hover_hold"


@dataclass(frozen=True)
class PilotCommand:
    """Attitude-plus-throttle request from whichever source is active."""

    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    throttle: float = 0.0   # rpm
    t: float = 0.0          # issue time, seconds


def manual_override(mission: PilotCommand | None,
                    manual: PilotCommand | None, t_now: float,
                    hover_throttle: float
                    ) -> tuple[CommandSource, PilotCommand]:
    """Pick the active command source.

    Manual input wins while it is less than 200 ms old; otherwise the
    mission source drives; with neither, a hover-hold command keeps the
    vehicle level at the configured hover throttle.
    """
    if manual is not None and t_now - manual.t < MANUAL_FRESH_S:
        return CommandSource.MANUAL, manual
    if mission is not None:
        return CommandSource.MISSION, mission
    return CommandSource.HOVER_HOLD, PilotCommand(
        0.0, 0.0, 0.0, hover_throttle, t_now)


class FlightController:
    """Owns the three axis loops and turns commands into bus frames."""

    def __init__(self, geometry: mixer.MixerGeometry | None = None,
                 omega_min: float = DEFAULT_OMEGA_MIN,
                 omega_max: float = DEFAULT_OMEGA_MAX):
        self.geometry = geometry or mixer.MixerGeometry()
        self.omega_min = omega_min
        self.omega_max = omega_max
        self.armed = False
        self.roll = pid.AxisPid(kp=30.0, ki=5.0, kd=10.0)
        self.pitch = pid.AxisPid(kp=30.0, ki=5.0, kd=10.0)
        self.yaw = pid.AxisPid(kp=30.0, ki=5.0, kd=10.0)

    def arm(self) -> None:
        self.armed = True

    def disarm(self) -> None:
        self.armed = False

    def set_gains(self, axis: str, kp: float, ki: float, kd: float) -> None:
        if axis not in ("roll", "pitch", "yaw"):
            raise ValidationError(f"unknown axis {axis!r}", key="axis")
        current: pid.AxisPid = getattr(self, axis)
        setattr(self, axis, pid.AxisPid(kp=kp, ki=ki, kd=kd,
                                        output_limit=current.output_limit))

    def control_step(self, att: AttitudeState, command: PilotCommand,
                     t_now: float = 0.0) -> tuple[CommandFrame, ...]:
        """One 500 Hz step; returns six speed frames, motors 1..6.

        Yaw is controlled on the heading relative to the last reset,
        with the error wrapped so the loop always turns the short way.
        """
        if not self.armed:
            raise DisarmedError("control step while disarmed")
        p, q, r = att.body_rates
        self.roll, roll_out = pid.pid_update(
            self.roll, command.roll, att.roll, p, CONTROL_DT)
        self.pitch, pitch_out = pid.pid_update(
            self.pitch, command.pitch, att.pitch, q, CONTROL_DT)
        yaw_error = wrap_angle(command.yaw - heading(att))
        self.yaw, yaw_out = pid.pid_update(
            self.yaw, yaw_error, 0.0, r, CONTROL_DT)
        points = mixer.saturate(command.throttle, roll_out, pitch_out,
                                yaw_out, self.omega_min, self.omega_max,
                                self.geometry)
        return tuple(
            CommandFrame.set_speed(addr, int(round(rpm)))
            for addr, rpm in zip(MOTOR_ADDRESSES, points))
