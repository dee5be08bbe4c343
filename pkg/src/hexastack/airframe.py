"""Rigid-body hexacopter, synthetic IMU/GPS, and battery accounting.

Body frame is front-right-down; the world frame stores position as
(north, east, altitude) with altitude positive up.  Thrust acts along
body -Z ("push air down"), prop reaction torques act about body Z with
the mixer's spin signs, and moments come from the same snapped weight
tables the mixer uses, so control and physics share one geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonFiniteState, ValidationError
from .frames import wrap_angle
from .mixer import MixerGeometry

G = 9.81   # m/s^2; the lift anchor is quoted as 9.81 N per motor

BATTERY_VOLTAGE = 16.8          # V
BATTERY_CAPACITY_WH = 97.44     # Wh
AVIONICS_POWER_W = 0.85         # W, idle draw with no motors running

MAX_FLIGHT_DT = 0.001


@dataclass(frozen=True)
class VehicleParams:
    """Physical constants of the airframe."""

    mass_empty: float = 1.8
    payload: float = 0.0
    arm_length: float = 0.35
    inertia: tuple[float, float, float] = (0.03, 0.03, 0.05)
    k_thrust: float = 1.354e-5      # N per (rad/s)^2; calibration overrides
    k_drag: float = 1.354e-5 * 0.016
    avionics_power: float = AVIONICS_POWER_W
    drag_linear: float = 0.0        # N per m/s body drag, all axes

    def __post_init__(self):
        if not 0.0 <= self.payload <= 4.0:
            raise ValidationError("payload must be within 0..4 kg",
                                  key="payload")
        for name in ("mass_empty", "arm_length", "k_thrust", "k_drag",
                     "avionics_power"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"{name} must be positive", key=name)
        if any(i <= 0.0 for i in self.inertia):
            raise ValidationError("inertia entries must be positive",
                                  key="inertia")
        if self.drag_linear < 0.0:
            raise ValidationError("drag_linear must be non-negative",
                                  key="drag_linear")

    @property
    def mass(self) -> float:
        return self.mass_empty + self.payload


@dataclass(frozen=True)
class VehicleState:
    """World pose plus body rates and the six rotor speeds."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    attitude: tuple[float, float, float] = (0.0, 0.0, 0.0)   # deg
    body_rates: tuple[float, float, float] = (0.0, 0.0, 0.0)  # deg/s
    motor_speeds: tuple[float, ...] = (0.0,) * 6              # rad/s


@dataclass(frozen=True)
class BatteryState:
    voltage: float = BATTERY_VOLTAGE
    capacity_full: float = BATTERY_CAPACITY_WH
    energy_remaining: float = BATTERY_CAPACITY_WH
    power_draw: float = 0.0

    @property
    def depleted(self) -> bool:
        return self.energy_remaining <= 0.0


def prop_forces(omega: float, params: VehicleParams) -> tuple[float, float]:
    """Quadratic propeller law: (thrust N, reaction torque N*m)."""
    if omega < 0.0:
        raise ValidationError("omega must be non-negative", key="omega")
    w2 = omega * omega
    return params.k_thrust * w2, params.k_drag * w2


def _derivative(s: tuple[float, ...], thrust_total: float,
                mx: float, my: float, mz: float,
                params: VehicleParams) -> tuple[float, ...]:
    (_, _, _, vx, vy, vz,
     roll, pitch, yaw, p_d, q_d, r_d) = s
    m = params.mass
    cd = params.drag_linear

    phi = math.radians(roll)
    theta = math.radians(pitch)
    psi = math.radians(yaw)
    sphi, cphi = math.sin(phi), math.cos(phi)
    stheta, ctheta = math.sin(theta), math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)

    # body -Z thrust expressed in the world frame
    ax = -thrust_total * (cpsi * stheta * cphi + spsi * sphi) / m - cd * vx / m
    ay = -thrust_total * (spsi * stheta * cphi - cpsi * sphi) / m - cd * vy / m
    az = thrust_total * (ctheta * cphi) / m - G - cd * vz / m

    # Euler-rate kinematics, degrees throughout
    if abs(ctheta) < 1.0e-6:
        ctheta = math.copysign(1.0e-6, ctheta if ctheta else 1.0)
    sway = q_d * sphi + r_d * cphi
    roll_dot = p_d + sway * stheta / ctheta
    pitch_dot = q_d * cphi - r_d * sphi
    yaw_dot = sway / ctheta

    # Euler rigid-body equations with diagonal inertia, rad/s internally
    ix, iy, iz = params.inertia
    p = math.radians(p_d)
    q = math.radians(q_d)
    r = math.radians(r_d)
    pdot = (mx + (iy - iz) * q * r) / ix
    qdot = (my + (iz - ix) * p * r) / iy
    rdot = (mz + (ix - iy) * p * q) / iz

    return (vx, vy, vz, ax, ay, az,
            roll_dot, pitch_dot, yaw_dot,
            math.degrees(pdot), math.degrees(qdot), math.degrees(rdot))


def step_rigid_body(state: VehicleState,
                    forces: tuple[tuple[float, float], ...],
                    geometry: MixerGeometry, params: VehicleParams,
                    dt: float) -> VehicleState:
    """Advance one flight-tier step under fixed per-motor (thrust, torque).

    Moments: roll and pitch from the arm geometry (shared weight
    tables), yaw from the signed reaction torques.  On the ground the
    vehicle stays put until thrust beats weight.
    """
    if not 0.0 < dt <= MAX_FLIGHT_DT + 1.0e-12:
        raise ValidationError("flight tier needs 0 < dt <= 1 ms", key="dt")
    if len(forces) != len(geometry.spin):
        raise ValidationError("one (thrust, torque) pair per motor",
                              key="forces")

    arm = params.arm_length
    thrust_total = 0.0
    mx = my = mz = 0.0
    for (thrust, torque), w_sin, w_cos, spin in zip(
            forces, geometry.roll_weights, geometry.pitch_weights,
            geometry.spin):
        thrust_total += thrust
        mx += arm * w_sin * thrust
        my += arm * w_cos * thrust
        mz += spin * torque

    s = state.position + state.velocity + state.attitude + state.body_rates
    k1 = _derivative(s, thrust_total, mx, my, mz, params)
    s2 = tuple(a + 0.5 * dt * b for a, b in zip(s, k1))
    k2 = _derivative(s2, thrust_total, mx, my, mz, params)
    s3 = tuple(a + 0.5 * dt * b for a, b in zip(s, k2))
    k3 = _derivative(s3, thrust_total, mx, my, mz, params)
    s4 = tuple(a + dt * b for a, b in zip(s, k3))
    k4 = _derivative(s4, thrust_total, mx, my, mz, params)
    out = tuple(a + dt / 6.0 * (b + 2.0 * c + 2.0 * d + e)
                for a, b, c, d, e in zip(s, k1, k2, k3, k4))

    if not all(math.isfinite(v) for v in out):
        raise NonFiniteState("rigid-body state diverged")

    x, y, z, vx, vy, vz = out[:6]
    roll, pitch, yaw = (wrap_angle(a) for a in out[6:9])
    rates = out[9:12]
    if z <= 0.0 and vz <= 0.0:
        # grounded: no sliding, no sinking, no tipping
        x, y = state.position[0], state.position[1]
        z = 0.0
        vx = vy = vz = 0.0
        roll, pitch, yaw = state.attitude
        rates = (0.0, 0.0, 0.0)
    return replace(state, position=(x, y, z), velocity=(vx, vy, vz),
                   attitude=(roll, pitch, yaw), body_rates=tuple(rates))


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian sensor noise and constant bias, zero by default."""

    accel_sigma: float = 0.0            # g
    gyro_sigma: float = 0.0             # deg/s
    mag_sigma: float = 0.0
    accel_bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gyro_bias: tuple[float, float, float] = (0.0, 0.0, 0.0)


def sensor_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def synth_sensors(state: VehicleState, noise: NoiseConfig | None = None,
                  rng: np.random.Generator | None = None
                  ) -> tuple[tuple[float, float, float],
                             tuple[float, float, float],
                             tuple[float, float, float]]:
    """Body-frame (accel g, gyro deg/s, mag unit) samples.

    The accelerometer reads the gravity projection (specific force of
    unaccelerated flight), the gyro the body rates, the mag the world
    north axis.  Noiseless mode is exact; with a NoiseConfig the
    samples add Gaussian noise from the caller's generator.
    """
    roll, pitch, yaw = (math.radians(a) for a in state.attitude)
    sphi, cphi = math.sin(roll), math.cos(roll)
    stheta, ctheta = math.sin(pitch), math.cos(pitch)
    spsi, cpsi = math.sin(yaw), math.cos(yaw)

    # rows of R_wb^T applied to (0,0,-1): gravity in body axes
    accel = (stheta, -ctheta * sphi, -ctheta * cphi)
    # R_wb^T applied to (1,0,0): world north in body axes
    mag = (ctheta * cpsi,
           stheta * sphi * cpsi - cphi * spsi,
           stheta * cphi * cpsi + sphi * spsi)
    gyro = state.body_rates

    if noise is None:
        return accel, gyro, mag
    if rng is None:
        raise ValidationError("noisy sampling needs a generator", key="rng")
    na = rng.normal(0.0, 1.0, 3)
    ng = rng.normal(0.0, 1.0, 3)
    nm = rng.normal(0.0, 1.0, 3)
    accel = tuple(v + noise.accel_sigma * e + b
                  for v, e, b in zip(accel, na, noise.accel_bias))
    gyro = tuple(v + noise.gyro_sigma * e + b
                 for v, e, b in zip(gyro, ng, noise.gyro_bias))
    mag = tuple(v + noise.mag_sigma * e for v, e in zip(mag, nm))
    return accel, gyro, mag


def battery_step(battery: BatteryState, power: float,
                 dt: float) -> BatteryState:
    """Drain energy by power*dt; remaining energy never goes negative."""
    if power < 0.0:
        raise ValidationError("power must be non-negative", key="power")
    if dt <= 0.0:
        raise ValidationError("dt must be positive", key="dt")
    drained = battery.energy_remaining - power * dt / 3600.0
    return replace(battery, energy_remaining=max(0.0, drained),
                   power_draw=power)


GPS_ORIGIN = (47.3977, 8.5456, 488.0)   # lat deg, lon deg, alt m
METERS_PER_DEG = 111000.0


def gps_stub(state: VehicleState,
             origin: tuple[float, float, float] = GPS_ORIGIN
             ) -> tuple[float, float, float]:
    """Flat-earth position readout for telemetry."""
    north, east, up = state.position
    lat0, lon0, alt0 = origin
    lat = lat0 + north / METERS_PER_DEG
    lon = lon0 + east / (METERS_PER_DEG *
                         math.cos(math.radians(lat0)))
    return lat, lon, alt0 + up
