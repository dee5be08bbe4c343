"""Propulsion calibration against the two measured power anchors.

The chain: the full-thrust point (9.81 N per motor at 9.8 A, full
duty) fixes the steady-state speed and therefore k_thrust; the hover
point (170 W total for 1.8 kg) fixes the per-motor electrical load
there.  The torque the quadratic prop law cannot explain at those two
speeds is attributed to a parasitic drag map c1*w + c2*w^2; both
coefficients must come out positive for the calibration to be
physical.  Everything downstream (power map, endurance arithmetic,
averaged-tier load) reads from the resulting record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import esc, frames
from .airframe import AVIONICS_POWER_W, G
from .errors import CalibrationFailure
from .motor import MotorParams, MotorState

VDC = 16.8
FULL_THRUST_N = 9.81          # one kilogram-force per motor
FULL_CURRENT_A = 9.8
HOVER_TOTAL_W = 170.0
EMPTY_MASS_KG = 1.8
TORQUE_THRUST_RATIO = 0.016   # m; k_drag = ratio * k_thrust
PROP_ROTOR_INERTIA = 8.0e-5   # kg m^2, rotor bell plus propeller


def flight_motor_params(pole_pairs: int = 2) -> MotorParams:
    """The propulsion motor as flown (propeller inertia included)."""
    return MotorParams(kv=530.0, r_phase=0.075, l_phase=1.0e-5,
                       i_max=10.0, pole_pairs=pole_pairs,
                       rotor_inertia=PROP_ROTOR_INERTIA)


@dataclass(frozen=True)
class PropulsionCalibration:
    """Propeller constants plus the per-motor electrical load map."""

    k_thrust: float       # N per (rad/s)^2
    k_drag: float         # N m per (rad/s)^2
    c1: float             # parasitic torque, N m per rad/s
    c2: float             # parasitic torque, N m per (rad/s)^2
    ke: float             # V s/rad; equals kt in SI
    r_loop: float         # ohm, two conducting phases
    vdc: float
    omega_full: float     # rad/s at the full-thrust anchor
    omega_hover: float    # rad/s at the no-payload hover anchor
    i_hover: float        # A per motor at hover
    avionics_power: float

    def parasitic_torque(self, omega: float) -> float:
        return self.c1 * omega + self.c2 * omega * omega

    def load_torque(self, omega: float) -> float:
        return self.k_drag * omega * omega + self.parasitic_torque(omega)

    def current_for_speed(self, omega: float) -> float:
        # steady state: motor torque kt*i balances the shaft load
        return self.load_torque(omega) / self.ke

    def duty_for_speed(self, omega: float) -> float:
        i = self.current_for_speed(omega)
        return (self.ke * omega + self.r_loop * i) / self.vdc

    def electrical_power(self, omega: float) -> float:
        """DC-side watts for one motor held at omega."""
        i = self.current_for_speed(omega)
        return (self.ke * omega + self.r_loop * i) * i

    def hover_speed(self, mass: float) -> float:
        """Per-motor speed where six rotors carry the given mass."""
        return math.sqrt(mass * G / (6.0 * self.k_thrust))

    def total_power(self, speeds) -> float:
        """Vehicle electrical draw: six motors plus avionics."""
        return (sum(self.electrical_power(w) for w in speeds)
                + self.avionics_power)


def calibrate_propulsion(kv: float = 530.0, r_phase: float = 0.075,
                         vdc: float = VDC,
                         full_thrust: float = FULL_THRUST_N,
                         full_current: float = FULL_CURRENT_A,
                         hover_total: float = HOVER_TOTAL_W,
                         hover_mass: float = EMPTY_MASS_KG,
                         torque_ratio: float = TORQUE_THRUST_RATIO,
                         avionics_power: float = AVIONICS_POWER_W
                         ) -> PropulsionCalibration:
    """Solve the propulsion constants from the two power anchors."""
    ke = 60.0 / (2.0 * math.pi * kv)
    r_loop = 2.0 * r_phase

    omega_full = (vdc - full_current * r_loop) / ke
    if omega_full <= 0.0:
        raise CalibrationFailure("full-duty speed not positive")
    k_thrust = full_thrust / (omega_full * omega_full)
    k_drag = torque_ratio * k_thrust

    # torque the prop law cannot explain at each anchor
    tau_full = ke * full_current - k_drag * omega_full * omega_full
    per_motor_w = (hover_total - avionics_power) / 6.0
    omega_hover = math.sqrt(hover_mass * G / (6.0 * k_thrust))
    disc = ke * ke * omega_hover * omega_hover + 4.0 * r_loop * per_motor_w
    i_hover = (-ke * omega_hover + math.sqrt(disc)) / (2.0 * r_loop)
    tau_hover = ke * i_hover - k_drag * omega_hover * omega_hover

    det = omega_full * omega_hover * (omega_hover - omega_full)
    if abs(det) < 1.0e-12:
        raise CalibrationFailure("anchor speeds coincide")
    c1 = (tau_full * omega_hover * omega_hover
          - tau_hover * omega_full * omega_full) / det
    c2 = (omega_full * tau_hover - omega_hover * tau_full) / det
    if tau_full < 0.0 or tau_hover < 0.0 or c1 < 0.0 or c2 < 0.0:
        raise CalibrationFailure(
            "no physical parasitic-torque map fits the anchors "
            f"(c1={c1:.3e}, c2={c2:.3e})")

    return PropulsionCalibration(
        k_thrust=k_thrust, k_drag=k_drag, c1=c1, c2=c2, ke=ke,
        r_loop=r_loop, vdc=vdc, omega_full=omega_full,
        omega_hover=omega_hover, i_hover=i_hover,
        avionics_power=avionics_power)


# measured on the switched tier, see measure_speed_lag
DEFAULT_SPEED_LAG_S = 0.065


@dataclass
class SpeedLagUnit:
    """Averaged-tier stand-in for one ESC + motor pair.

    The closed speed loop is reduced to a first-order tracking lag;
    the exact exponential update keeps the step stable for any dt.
    """

    tau: float = DEFAULT_SPEED_LAG_S
    omega: float = 0.0   # rad/s

    def step(self, omega_cmd: float, dt: float) -> float:
        blend = 1.0 - math.exp(-dt / self.tau)
        self.omega += (omega_cmd - self.omega) * blend
        return self.omega


def measure_speed_lag(cal: PropulsionCalibration,
                      from_rpm: float = 3000.0, to_rpm: float = 4500.0,
                      settle: float = 0.5, window: float = 1.0) -> float:
    """Time constant of the switched-tier speed step, seconds.

    Runs the full controller + motor pair under the calibrated
    propeller load, steps the setpoint, and times the 63.2% rise.
    """
    cfg = esc.EscConfig()
    params = flight_motor_params(pole_pairs=2)
    motor = esc.SwitchedMotor(
        params, MotorState(),
        load=lambda w: math.copysign(cal.load_torque(abs(w)), w))
    ctrl = esc.EscController(address=1, config=cfg, pole_pairs=2)
    ctrl.handle_frame(frames.encode_command(
        frames.CommandFrame(1, frames.CMD_ARM)))
    ctrl.handle_frame(frames.encode_command(
        frames.CommandFrame.set_speed(1, int(round(from_rpm)))))

    dt = cfg.pwm_period
    n_settle = round(settle / dt)
    for i in range(n_settle):
        ctrl.tick(i * dt, motor, cal.vdc)

    ctrl.handle_frame(frames.encode_command(
        frames.CommandFrame.set_speed(1, int(round(to_rpm)))))
    target = from_rpm + (1.0 - math.exp(-1.0)) * (to_rpm - from_rpm)
    t_step = n_settle * dt
    prev_rpm = motor.rpm
    for i in range(n_settle, n_settle + round(window / dt)):
        ctrl.tick(i * dt, motor, cal.vdc)
        rpm = motor.rpm
        if prev_rpm < target <= rpm:
            frac = (target - prev_rpm) / (rpm - prev_rpm)
            return (i + frac) * dt + dt - t_step
        prev_rpm = rpm
    raise CalibrationFailure("speed step never reached 63.2% of the rise")
