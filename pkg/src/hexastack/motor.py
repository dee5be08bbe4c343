"""Three-phase sensorless BLDC motor plant.

Electrical model: per-phase RL circuit with a trapezoidal back-EMF, star
connected, driven by a three half-bridge inverter in six-step commutation
(two phases conducting, one floating).  Two stepping modes exist:

* switched: PWM edges resolved, sub-microsecond substeps, used to exercise
  the zero-crossing detector in the motor controller firmware;
* averaged: duty-averaged voltages with ideal commutation, millisecond
  steps, used for minutes-long endurance runs.

The trapezoid has 60 degree flat tops at +-1 and 120 degree linear ramps,
phases offset by 120 electrical degrees, which makes the three shape
values sum to exactly zero at every angle.  The sector average of the
line-to-line shape difference for the conducting pair is then 7/4, so the
per-phase back-EMF is scaled by 4/7 * kt: the sector-mean line back-EMF is
kt * omega and the sector-mean torque at constant current is kt * i, which
keeps the speed constant meaningful as a terminal volts-per-rpm figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .errors import CurrentLimitFault, NonFiniteState, ValidationError

TWO_PI = 2.0 * math.pi
_SIXTH = math.pi / 3.0

# sector-mean line-to-line shape factor is 7/4; scale phase BEMF so the
# mean line BEMF equals kt * omega
PHASE_BEMF_SCALE = 4.0 / 7.0

CURRENT_ABORT_FACTOR = 1.5


class Connection(IntEnum):
    """Half-bridge state of one motor terminal."""

    HIGH = 0   # tied to vdc through the PWM switch
    LOW = 1    # tied to the return rail
    FLOAT = 2  # disconnected, back-EMF observable


@dataclass(frozen=True, slots=True)
class MotorParams:
    """Electromechanical constants of one outrunner.

    kt is derived from the speed constant: kt = 60 / (2 pi kv), the SI
    torque constant matching kv interpreted as no-load rpm per volt.
    """

    kv: float                    # speed constant [rpm/V]
    r_phase: float               # per-phase resistance [ohm]
    l_phase: float               # per-phase inductance [H]
    i_max: float                 # rated max current [A]
    p_rated: float = 150.0       # rated power [W]
    pole_pairs: int = 11
    rotor_inertia: float = 2.0e-5   # rotor + prop inertia [kg m^2]
    friction_coeff: float = 2.0e-5  # viscous drag [N m s/rad]

    def __post_init__(self):
        for name in ("kv", "r_phase", "l_phase", "i_max", "p_rated",
                     "rotor_inertia"):
            if getattr(self, name) <= 0.0:
                raise ValidationError("must be positive", key=name)
        if self.friction_coeff < 0.0:
            raise ValidationError("must be non-negative", key="friction_coeff")
        if self.pole_pairs < 1:
            raise ValidationError("must be >= 1", key="pole_pairs")

    @property
    def kt(self) -> float:
        """Torque constant [N m/A], SI-consistent with kv."""
        return 60.0 / (TWO_PI * self.kv)

    @property
    def i_abort(self) -> float:
        return CURRENT_ABORT_FACTOR * self.i_max


@dataclass(frozen=True, slots=True)
class MotorState:
    """Instantaneous plant state.  theta_mech is kept in [0, 2 pi)."""

    theta_mech: float = 0.0
    omega_mech: float = 0.0          # [rad/s]
    currents: tuple[float, float, float] = (0.0, 0.0, 0.0)
    timestamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta_mech", self.theta_mech % TWO_PI)

    def theta_elec(self, params: MotorParams) -> float:
        return (self.theta_mech * params.pole_pairs) % TWO_PI


@dataclass(frozen=True, slots=True)
class PhaseDrive:
    """Inverter command: per-phase connection plus rail voltage and duty."""

    connections: tuple[Connection, Connection, Connection]
    vdc: float
    duty: float = 1.0

    def __post_init__(self):
        floats = sum(1 for c in self.connections if c is Connection.FLOAT)
        if floats not in (1, 3):
            raise ValidationError(
                "exactly one phase must float while driven (or all three "
                "to coast)", key="connections")
        if not 0.0 <= self.duty <= 1.0:
            raise ValidationError("duty must be in [0, 1]", key="duty")
        if self.vdc < 0.0:
            raise ValidationError("vdc must be non-negative", key="vdc")

    @property
    def coasting(self) -> bool:
        return all(c is Connection.FLOAT for c in self.connections)


COAST = (Connection.FLOAT, Connection.FLOAT, Connection.FLOAT)


def _shape(x: float) -> float:
    # x wrapped to [0, 2 pi); piecewise linear trapezoid, zero at 0 rising
    if x < _SIXTH:
        return x / _SIXTH
    if x < 2.0 * _SIXTH:
        return 1.0
    if x < 4.0 * _SIXTH:
        return (math.pi - x) / _SIXTH
    if x < 5.0 * _SIXTH:
        return -1.0
    return (x - TWO_PI) / _SIXTH


def bemf_shape(theta_e: float) -> tuple[float, float, float]:
    """Unitless per-phase back-EMF shape at electrical angle theta_e.

    Values lie in [-1, 1] and the three always sum to zero.  Each phase
    crosses zero exactly twice per electrical period.
    """
    x = theta_e % TWO_PI
    return (_shape(x),
            _shape((x - TWO_PI / 3.0) % TWO_PI),
            _shape((x - 2.0 * TWO_PI / 3.0) % TWO_PI))


def optimal_sector(theta_e: float) -> int:
    """Commutation sector giving maximum positive torque at this angle.

    Sector s is optimal for electrical angles [30 + 60 s, 90 + 60 s)
    degrees; the floating phase's back-EMF crosses zero at the center of
    each span.
    """
    return int(((theta_e - math.pi / 6.0) % TWO_PI) / _SIXTH) % 6


def _roles(drive: PhaseDrive) -> tuple[int, int, int]:
    high = low = floating = -1
    for idx, conn in enumerate(drive.connections):
        if conn is Connection.HIGH:
            high = idx
        elif conn is Connection.LOW:
            low = idx
        else:
            floating = idx
    return high, low, floating


def step_electrical(state: MotorState, drive: PhaseDrive, params: MotorParams,
                    dt: float, load_torque: float = 0.0,
                    on_interval: bool = True) -> MotorState:
    """Advance the plant one switched-tier substep.

    dt must not exceed 5 microseconds (explicit integration stability for
    the 133 us electrical time constant).  on_interval selects the PWM
    on segment (rail voltage applied) or off segment (pair shorted through
    the low side, current freewheels).

    Raises CurrentLimitFault past 1.5x the rated current and
    NonFiniteState if integration diverges.
    """
    if dt <= 0.0 or dt > 5.0e-6:
        raise ValidationError("switched step needs 0 < dt <= 5e-6", key="dt")

    if drive.coasting:
        omega = state.omega_mech + dt * (
            -load_torque - params.friction_coeff * state.omega_mech
        ) / params.rotor_inertia
        theta = state.theta_mech + dt * omega
        return MotorState(theta, omega, (0.0, 0.0, 0.0), state.timestamp + dt)

    high, low, floating = _roles(drive)
    shapes = bemf_shape(state.theta_elec(params))
    scale = PHASE_BEMF_SCALE * params.kt
    e_ll = scale * (shapes[high] - shapes[low]) * state.omega_mech

    v_applied = drive.vdc if on_interval else 0.0
    i = state.currents[high]
    di = (v_applied - e_ll - 2.0 * params.r_phase * i) / (2.0 * params.l_phase)
    i_new = i + dt * di

    if not math.isfinite(i_new):
        raise NonFiniteState("phase current diverged")
    if abs(i_new) > params.i_abort:
        raise CurrentLimitFault(
            f"|{i_new:.2f} A| exceeds {params.i_abort:.2f} A")

    torque = scale * (shapes[high] - shapes[low]) * i_new
    omega = state.omega_mech + dt * (
        torque - load_torque - params.friction_coeff * state.omega_mech
    ) / params.rotor_inertia
    if not math.isfinite(omega):
        raise NonFiniteState("speed diverged")
    theta = state.theta_mech + dt * omega

    currents = [0.0, 0.0, 0.0]
    currents[high] = i_new
    currents[low] = -i_new
    return MotorState(theta, omega, tuple(currents), state.timestamp + dt)


def carry_current(state: MotorState, old_drive: PhaseDrive,
                  new_drive: PhaseDrive) -> MotorState:
    """Re-seat the conduction-loop current across a commutation.

    Consecutive sectors share one driven phase; its current continues into
    the new loop while the newly floating phase is forced to zero.
    """
    if old_drive.coasting or new_drive.coasting:
        return MotorState(state.theta_mech, state.omega_mech,
                          (0.0, 0.0, 0.0), state.timestamp)
    old_high, old_low, _ = _roles(old_drive)
    new_high, new_low, _ = _roles(new_drive)
    if new_high == old_high or new_low == old_low:
        i = state.currents[old_high]
    else:
        i = 0.0
    currents = [0.0, 0.0, 0.0]
    currents[new_high] = i
    currents[new_low] = -i
    return MotorState(state.theta_mech, state.omega_mech, tuple(currents),
                      state.timestamp)


def terminal_voltage(state: MotorState, drive: PhaseDrive, params: MotorParams,
                     on_interval: bool = True) -> tuple[float, float, float]:
    """Terminal voltages of the three phases.

    Driven phases report their rail voltage; the floating phase reports
    the reconstructed neutral (average of the two driven rails) plus its
    own back-EMF, which is what the zero-crossing comparator samples.
    """
    shapes = bemf_shape(state.theta_elec(params))
    scale = PHASE_BEMF_SCALE * params.kt
    if drive.coasting:
        return tuple(scale * s * state.omega_mech for s in shapes)

    high, low, floating = _roles(drive)
    v_high = drive.vdc if on_interval else 0.0
    v_low = 0.0
    neutral = 0.5 * (v_high + v_low)
    volts = [0.0, 0.0, 0.0]
    volts[high] = v_high
    volts[low] = v_low
    volts[floating] = neutral + scale * shapes[floating] * state.omega_mech
    return tuple(volts)


def electrical_power(state: MotorState, drive: PhaseDrive, params: MotorParams,
                     on_interval: bool = True) -> float:
    """Instantaneous DC-side power: sum of rail voltage times phase current
    over the driven phases."""
    if drive.coasting:
        return 0.0
    high, low, _ = _roles(drive)
    v_high = drive.vdc if on_interval else 0.0
    return v_high * state.currents[high]


class SwitchedMotor:
    """Stateful plant facade for the switched tier.

    Owns a MotorState, integrates drive segments with substeps within the
    stability bound, and exposes the terminal quantities the controller
    firmware samples.  A load callable maps omega to shaft load torque;
    prescribe_omega pins the speed (infinite-inertia rotor) for detector
    geometry tests.
    """

    def __init__(self, params: MotorParams, state: MotorState | None = None,
                 load=None, prescribe_omega: float | None = None,
                 dt_max: float = 2.5e-6):
        if dt_max <= 0.0 or dt_max > 5.0e-6:
            raise ValidationError("dt_max must be in (0, 5e-6]", key="dt_max")
        self.params = params
        self.state = state or MotorState()
        self.load = load or (lambda omega: 0.0)
        self.prescribe_omega = prescribe_omega
        self.dt_max = dt_max
        self.drive = PhaseDrive(COAST, 0.0)
        self.peak_current = 0.0   # largest |phase current| ever integrated
        if prescribe_omega is not None:
            self.state = MotorState(self.state.theta_mech, prescribe_omega,
                                    self.state.currents, self.state.timestamp)

    def set_drive(self, drive: PhaseDrive):
        self.state = carry_current(self.state, self.drive, drive)
        self.drive = drive

    def run(self, duration: float, on_interval: bool,
            i_stop: float | None = None,
            i_floor: float | None = None) -> float:
        """Advance the plant for duration seconds at the current drive.

        i_stop and i_floor model the power stage's analog current
        comparator: integration stops early the moment the conduction-
        loop current reaches i_stop from below or i_floor from above.
        Returns the time actually advanced, which is less than duration
        only on such a stop.
        """
        if duration <= 0.0:
            return 0.0
        n = max(1, math.ceil(duration / self.dt_max))
        dt = duration / n
        state = self.state
        peak = self.peak_current
        done = 0
        for _ in range(n):
            state = step_electrical(state, self.drive, self.params, dt,
                                    self.load(state.omega_mech), on_interval)
            done += 1
            i = abs(max(state.currents, key=abs))
            if i > peak:
                peak = i
            if self.prescribe_omega is not None:
                state = MotorState(state.theta_mech, self.prescribe_omega,
                                   state.currents, state.timestamp)
            if ((i_stop is not None or i_floor is not None)
                    and not self.drive.coasting):
                high, _, _ = _roles(self.drive)
                i_loop = state.currents[high]
                if i_stop is not None and i_loop >= i_stop:
                    break
                if i_floor is not None and i_loop <= i_floor:
                    break
        self.state = state
        self.peak_current = peak
        return done * dt

    def floating_voltage(self, on_interval: bool = True) -> float:
        high, low, floating = _roles(self.drive)
        if floating < 0 or self.drive.coasting:
            return 0.0
        return terminal_voltage(self.state, self.drive, self.params,
                                on_interval)[floating]

    def loop_current(self) -> float:
        if self.drive.coasting:
            return 0.0
        high, _, _ = _roles(self.drive)
        return self.state.currents[high]

    @property
    def rpm(self) -> float:
        return self.state.omega_mech * 60.0 / TWO_PI


def step_averaged(state: MotorState, duty: float, vdc: float,
                  params: MotorParams, dt: float,
                  load_torque: float = 0.0) -> tuple[MotorState, float, float]:
    """Advance one averaged-tier step with ideal commutation.

    The electrical time constant (133 us) is far below the millisecond
    step, so the conduction current is quasi-static:
    i = (duty vdc - kt omega) / (2 r_phase), torque = kt i.

    Returns (new state, dc current, electrical power drawn).
    """
    if dt <= 0.0:
        raise ValidationError("dt must be positive", key="dt")
    kt = params.kt
    i = (duty * vdc - kt * state.omega_mech) / (2.0 * params.r_phase)
    torque = kt * i
    omega = state.omega_mech + dt * (
        torque - load_torque - params.friction_coeff * state.omega_mech
    ) / params.rotor_inertia
    theta = state.theta_mech + dt * omega
    power = duty * vdc * i
    new = MotorState(theta, omega, (i, -i, 0.0), state.timestamp + dt)
    return new, i, power
