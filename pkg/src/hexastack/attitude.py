"""Complementary-filter attitude estimation from a 9-axis IMU triad.

Angles follow the front-right-down body convention: roll positive right
wing down, pitch positive nose up, yaw positive clockwise seen from
above.  Gyro rates are propagated through the Euler-rate kinematics,
then pulled toward the accelerometer tilt and the tilt-compensated
magnetometer heading with a configurable blend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NotStationary, ValidationError
from .frames import wrap_angle

# accelerometer correction applies only near 1 g specific force
ACCEL_BAND_G = (0.5, 1.5)
STATIONARY_RATE_DPS = 1.0
DEFAULT_ALPHA = 0.98

_COS_FLOOR = 1.0e-6


@dataclass(frozen=True)
class AttitudeState:
    """Fused angles in degrees plus the latest body rates in deg/s."""

    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    body_rates: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw_offset: float = 0.0


def heading(state: AttitudeState) -> float:
    """Reported yaw, measured from the last heading reset."""
    return wrap_angle(state.yaw - state.yaw_offset)


def tilt_from_accel(accel: tuple[float, float, float]) -> tuple[float, float]:
    """(roll, pitch) in degrees from a specific-force sample in g.

    Level flight reads (0, 0, -1) g, so gravity enters with a minus
    sign on both axes of the roll atan2.
    """
    ax, ay, az = accel
    roll = math.degrees(math.atan2(-ay, -az))
    pitch = math.degrees(math.atan2(ax, math.hypot(ay, az)))
    return roll, pitch


def heading_from_mag(mag: tuple[float, float, float], roll_deg: float,
                     pitch_deg: float) -> float:
    """Tilt-compensated compass heading in degrees.

    De-rotates the body-frame field by roll then pitch and reads the
    heading from the level components; the reference field points
    along the world +X (north, forward at zero yaw) axis.
    """
    mx, my, mz = mag
    sphi = math.sin(math.radians(roll_deg))
    cphi = math.cos(math.radians(roll_deg))
    stheta = math.sin(math.radians(pitch_deg))
    ctheta = math.cos(math.radians(pitch_deg))
    level_y = cphi * my - sphi * mz
    tilted_z = sphi * my + cphi * mz
    level_x = ctheta * mx + stheta * tilted_z
    return math.degrees(math.atan2(-level_y, level_x))


def fuse_imu(accel: tuple[float, float, float],
             gyro: tuple[float, float, float],
             mag: tuple[float, float, float] | None,
             state: AttitudeState, dt: float,
             alpha: float = DEFAULT_ALPHA) -> AttitudeState:
    """One fusion step; returns the advanced state.

    Gyro rates are exact Euler-rate propagation, so noiseless tracking
    is limited only by the integration step.  The accelerometer pulls
    roll and pitch when its magnitude is within the 0.5..1.5 g band;
    a mag sample, when given, pulls yaw the same way.  Passing None
    for mag leaves yaw gyro-only.
    """
    if dt <= 0.0:
        raise ValidationError("dt must be positive", key="dt")
    p, q, r = gyro
    phi = math.radians(state.roll)
    theta = math.radians(state.pitch)
    sphi, cphi = math.sin(phi), math.cos(phi)
    ctheta = math.cos(theta)
    if abs(ctheta) < _COS_FLOOR:
        ctheta = math.copysign(_COS_FLOOR, ctheta if ctheta else 1.0)
    tantheta = math.sin(theta) / ctheta
    sway = q * sphi + r * cphi
    roll_g = state.roll + (p + sway * tantheta) * dt
    pitch_g = state.pitch + (q * cphi - r * sphi) * dt
    yaw_g = state.yaw + (sway / ctheta) * dt

    roll_f, pitch_f = roll_g, pitch_g
    ax, ay, az = accel
    a_mag = math.sqrt(ax * ax + ay * ay + az * az)
    if ACCEL_BAND_G[0] <= a_mag <= ACCEL_BAND_G[1]:
        roll_a, pitch_a = tilt_from_accel(accel)
        roll_f = roll_g + (1.0 - alpha) * wrap_angle(roll_a - roll_g)
        pitch_f = pitch_g + (1.0 - alpha) * wrap_angle(pitch_a - pitch_g)

    yaw_f = yaw_g
    if mag is not None:
        mx, my, mz = mag
        if math.sqrt(mx * mx + my * my + mz * mz) > 1.0e-9:
            yaw_m = heading_from_mag(mag, roll_f, pitch_f)
            yaw_f = yaw_g + (1.0 - alpha) * wrap_angle(yaw_m - yaw_g)

    return replace(state, roll=wrap_angle(roll_f), pitch=wrap_angle(pitch_f),
                   yaw=wrap_angle(yaw_f), body_rates=(p, q, r))


def reset_heading(state: AttitudeState) -> AttitudeState:
    """Zero the reported heading at the current raw yaw."""
    if max(abs(w) for w in state.body_rates) >= STATIONARY_RATE_DPS:
        raise NotStationary("heading reset needs body rates below "
                            f"{STATIONARY_RATE_DPS} deg/s")
    return replace(state, yaw_offset=state.yaw)
