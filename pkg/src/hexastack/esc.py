"""Sensorless motor controller firmware model.

One instance models the firmware of a single speed controller: six-step
commutation driven by back-EMF zero crossings on the floating phase,
majority-vote glitch filtering of the comparator stream, the equal-time
commutation rule (a confirmed crossing sits 30 electrical degrees into a
60 degree sector, so the next commutation is scheduled one crossing-to-
commutation interval after the crossing), a PI speed loop acting on PWM
duty, and the bus-slave command interface.

The controller advances in PWM periods (20 kHz).  Within a period the
plant is integrated in segments so that the on/off edge, the comparator
sample, and a scheduled commutation each happen at their exact instants;
commutation is not quantized to period boundaries.  The comparator is
sampled once per period at the center of the on interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from . import frames
from .errors import (CrcError, CurrentLimitFault, InvalidSector,
                     MalformedLength, StartupFailure, ValidationError)
from .motor import COAST, Connection, PhaseDrive, SwitchedMotor

# sector -> (phase A, phase B, phase C) connections; sectors three apart
# are complements of each other
COMMUTATION_TABLE = (
    (Connection.HIGH, Connection.LOW, Connection.FLOAT),
    (Connection.HIGH, Connection.FLOAT, Connection.LOW),
    (Connection.FLOAT, Connection.HIGH, Connection.LOW),
    (Connection.LOW, Connection.HIGH, Connection.FLOAT),
    (Connection.LOW, Connection.FLOAT, Connection.HIGH),
    (Connection.FLOAT, Connection.LOW, Connection.HIGH),
)

# status codes carried in the payload of a command reply
REPLY_OK = 0x00
REPLY_CRC_ERROR = 0x01
REPLY_MALFORMED = 0x02
REPLY_UNDERSPEED = 0x03
REPLY_UNKNOWN_COMMAND = 0x04

# GET_STATUS flag bits
FLAG_FAULT = 0x01
FLAG_CLOSED_LOOP = 0x02
FLAG_ARMED = 0x04


def commutation_table(sector: int) -> tuple[Connection, Connection, Connection]:
    """Half-bridge pattern for a commutation sector (0..5)."""
    if not isinstance(sector, int) or not 0 <= sector <= 5:
        raise InvalidSector(f"sector {sector!r} outside 0..5")
    return COMMUTATION_TABLE[sector]


def floating_phase(sector: int) -> int:
    return commutation_table(sector).index(Connection.FLOAT)


def expected_rising(sector: int) -> bool:
    """Crossing polarity on the floating phase for this sector.

    Even sectors see the back-EMF fall through the half-rail threshold,
    odd sectors see it rise.
    """
    if not isinstance(sector, int) or not 0 <= sector <= 5:
        raise InvalidSector(f"sector {sector!r} outside 0..5")
    return sector % 2 == 1


def sample_comparator(v_float: float, vdc: float, rising: bool) -> bool:
    """Comparator verdict against the half-rail threshold.

    The boundary sample counts as crossed: >= on rising, <= on falling.
    """
    threshold = 0.5 * vdc
    return v_float >= threshold if rising else v_float <= threshold


def majority_filter(window: tuple[bool, ...]) -> bool:
    """True iff more than half of the window samples are true.

    The window length must be odd so a majority always exists; a single
    glitch sample can never trigger detection.
    """
    if len(window) % 2 == 0:
        raise ValidationError("window length must be odd", key="window")
    return sum(window) > len(window) // 2


@dataclass(frozen=True, slots=True)
class PIState:
    """Speed-loop PI with clamped integrator (anti-windup)."""

    kp: float = 5.0e-5
    ki: float = 2.0e-4
    integrator: float = 0.0


def pi_speed_update(pi: PIState, target_rpm: float, measured_rpm: float,
                    dt: float) -> tuple[PIState, float]:
    """One speed-loop update: duty = clamp(kp e + integrator, 0, 1), then
    integrator += ki e dt, clamped to [0, 1]."""
    error = target_rpm - measured_rpm
    duty = min(1.0, max(0.0, pi.kp * error + pi.integrator))
    integrator = min(1.0, max(0.0, pi.integrator + pi.ki * error * dt))
    return replace(pi, integrator=integrator), duty


class Mode(Enum):
    IDLE = "IDLE"
    ALIGN = "ALIGN"
    OPEN_LOOP_RAMP = "OPEN_LOOP_RAMP"
    CLOSED_LOOP = "CLOSED_LOOP"


@dataclass
class EscConfig:
    pwm_freq: float = 20_000.0
    speed_loop_div: int = 20          # speed loop at pwm/div (1 kHz)
    kp: float = 5.0e-5
    ki: float = 2.0e-4
    duty_slew_per_s: float = 4.0      # limits inrush on large speed steps
    filter_window: int = 5
    align_sector: int = 0
    align_duty: float = 0.05
    t_align: float = 0.1
    # PWM periods per dither half-cycle; several electrical time constants
    # so damping currents develop inside each well before the handover
    align_dither_div: int = 8
    # torque-margin part of the ramp duty, tapered across the ramp: a fat
    # margin breaks the rotor away, but by the end it must be thin so the
    # rotor settles into a lagging load angle.  A leading rotor puts each
    # back-EMF crossing before its sector even opens (the phase is still
    # driven) and the detector would see nothing to hand off on.
    ramp_duty: float = 0.05
    ramp_duty_end: float = 0.02
    # the rate profile is a kick and catch.  The first energized sector
    # slings the parked rotor through a full torque well, which alone
    # takes it to over a thousand rpm within milliseconds, so the cadence
    # begins near the speed the sling produces and rises from there.
    # Crawling upward from a standstill cadence instead would drag the
    # rotor through the band where stepping resonates with its torsional
    # oscillation, and it falls out of sync there every time.
    ramp_rate_start: float = 240.0    # commutations per second
    ramp_rate_end: float = 450.0
    t_ramp: float = 0.05
    t_startup_max: float = 1.0
    # nominal torque constant for the open-loop voltage/frequency ramp:
    # duty tracks the synchronous back-EMF so the torque margin stays
    # constant and the rotor stays entrained up to the handoff rate
    motor_kt: float = 0.018
    handoff_sectors: int = 6          # consecutive sectors with a crossing
    min_closed_loop_rpm: float = 1000.0
    min_sample_duty: float = 0.04     # below this the on pulse is too short
    min_zc_interval_periods: float = 2.0   # faster crossings are unresolvable
    # commutation-schedule regularization, in PWM periods per crossing;
    # must stay below the one-tick equal-time tolerance
    comm_correction_ticks: float = 0.5
    speed_est_alpha: float = 0.2
    stall_timeout_factor: float = 1.8
    # hysteretic cycle-by-cycle current limit, modeling the power
    # stage's analog comparator on the conduction shunt: the moment the
    # loop current touches i_limit the gate drops, the loop freewheels
    # until the current falls by the hysteresis, and the gate re-opens
    # if the PWM on window is still running.  Holding the gate off for
    # the whole remaining period would be worse than the fault it
    # prevents: above base speed the line back-EMF exceeds the rails
    # and a long freewheel dives the current through the negative abort
    # level.  The limit lives and dies within its own period; carrying
    # any derating across periods lets one commutation transient
    # collapse the duty and wedge the drive in regeneration.  Only
    # positive excursions trip: the on interval is what pulls a
    # regenerating (negative) current back toward zero, so cutting it
    # then would deepen the excursion
    i_limit: float = 10.0
    chop_hysteresis: float = 1.0
    # commutation softening: run mildly reduced duty while the incoming
    # pair's current slews to its new level, holding the applied volts
    # near the back-EMF.  With phase inductance this small, full duty
    # right after the pair change rides the inrush into the power
    # stage's abort level near half duty, while gating fully off would
    # short the spinning machine through the freewheel path and crash
    # the current just as far the other way
    soft_comm_periods: int = 3
    soft_comm_scale: float = 0.85

    def __post_init__(self):
        if self.filter_window % 2 == 0 or self.filter_window < 1:
            raise ValidationError("filter_window must be odd and positive",
                                  key="filter_window")
        if self.speed_loop_div < 1:
            raise ValidationError("speed_loop_div must be >= 1",
                                  key="speed_loop_div")

    @property
    def pwm_period(self) -> float:
        return 1.0 / self.pwm_freq


@dataclass
class CommutationState:
    """Observable firmware state of one controller."""

    mode: Mode = Mode.IDLE
    sector: int = 0
    duty: float = 0.0
    target_rpm: float = 0.0
    speed_estimate_rpm: float = 0.0
    pi: PIState = field(default_factory=PIState)
    armed: bool = False
    fault: str | None = None
    t_last_commutation: float = 0.0
    t_zero_cross: float | None = None        # crossing latched this sector
    t_next_commutation: float | None = None
    zc_filter_window: tuple[bool, ...] = ()
    commutations: int = 0
    spurious_zc: int = 0
    blind_commutations: int = 0
    t_mode_entered: float = 0.0
    t_startup_began: float = 0.0
    t_next_forced: float = 0.0
    handoff_run: int = 0
    zc_seen_this_sector: bool = False
    # a crossing only counts after the comparator has read the pre-crossing
    # side at least once this sector; entering a sector already past the
    # threshold must not fabricate an instant crossing
    armed_for_cross: bool = False
    last_sector_duration: float = 0.0
    t_last_ramp_zc: float | None = None
    # sub-sample crossing placement: the previous comparator sample and the
    # threshold time interpolated from the pair that bracketed the raw flip
    prev_sample: tuple[float, float] | None = None
    t_raw_cross: float | None = None
    current_trips: int = 0            # on intervals ended by the limiter
    soft_comm_left: int = 0           # periods still under the duty dip


def speed_from_interval(interval_30deg: float, pole_pairs: int) -> float:
    """Mechanical rpm from the commutation-to-crossing (30 degree) time."""
    if interval_30deg <= 0.0:
        raise ValidationError("interval must be positive", key="interval")
    return 5.0 / (pole_pairs * interval_30deg)


def on_zero_cross(state: CommutationState, t_now: float,
                  pole_pairs: int, alpha: float = 0.2,
                  min_interval: float = 0.0,
                  max_correction: float = 0.0) -> CommutationState:
    """Register a confirmed crossing at t_now.

    Schedules the next commutation at t_now + (t_now - t_last_commutation)
    and folds the implied speed into the running estimate.  A second
    crossing in the same sector, or one timed implausibly close to the
    last commutation, is counted as spurious and ignored.

    The raw equal-time schedule reflects any commutation phase error into
    the next sector with its sign flipped: the mode neither grows nor
    decays on its own, so crossing-measurement jitter walks its amplitude
    up until long sectors run the rotor off the flat of its back-EMF.
    max_correction allows the schedule to be nudged toward the filtered
    30-degree period by at most that many seconds per crossing, which
    damps the mode while staying inside the equal-time tolerance.
    """
    if state.t_zero_cross is not None:
        state.spurious_zc += 1
        return state
    interval = t_now - state.t_last_commutation
    if interval <= min_interval:
        state.spurious_zc += 1
        return state
    correction = 0.0
    if max_correction > 0.0 and state.speed_estimate_rpm > 0.0:
        target = 5.0 / (pole_pairs * state.speed_estimate_rpm)
        correction = min(max(target - interval, -max_correction),
                         max_correction)
    state.t_zero_cross = t_now
    state.t_next_commutation = t_now + interval + correction
    rpm = speed_from_interval(interval, pole_pairs)
    if state.speed_estimate_rpm <= 0.0:
        state.speed_estimate_rpm = rpm
    else:
        state.speed_estimate_rpm += alpha * (rpm - state.speed_estimate_rpm)
    return state


class EscController:
    """Firmware of one speed controller driving one motor plant."""

    def __init__(self, address: int, config: EscConfig | None = None,
                 pole_pairs: int = 11):
        self.address = address
        self.config = config or EscConfig()
        self.pole_pairs = pole_pairs
        self.state = CommutationState(
            pi=PIState(kp=self.config.kp, ki=self.config.ki))
        self._loop_counter = 0
        self._dither = 0

    # --- command handling -------------------------------------------------

    def handle_frame(self, raw: bytes) -> bytes:
        """Process one bus frame addressed to this controller.

        Decode failures produce an error reply and change no state.
        """
        try:
            frame = frames.decode_command(raw)
        except CrcError:
            return self._reply(0x00, bytes([REPLY_CRC_ERROR]))
        except MalformedLength:
            return self._reply(0x00, bytes([REPLY_MALFORMED]))
        except ValidationError:
            return self._reply(0x00, bytes([REPLY_UNKNOWN_COMMAND]))

        st = self.state
        if frame.command == frames.CMD_SET_SPEED:
            rpm = frame.rpm
            if 0 < rpm < self.config.min_closed_loop_rpm:
                # too slow for sensorless control; refuse, keep old target
                return self._reply(frame.command, bytes([REPLY_UNDERSPEED]))
            st.target_rpm = float(rpm)
            return self._reply(frame.command, bytes([REPLY_OK]))
        if frame.command == frames.CMD_ARM:
            st.armed = True
            return self._reply(frame.command, bytes([REPLY_OK]))
        if frame.command == frames.CMD_DISARM:
            st.armed = False
            st.mode = Mode.IDLE
            st.duty = 0.0
            return self._reply(frame.command, bytes([REPLY_OK]))
        # GET_STATUS
        rpm = int(round(min(max(st.speed_estimate_rpm, 0.0), 65535.0)))
        duty_byte = int(round(st.duty * 255.0))
        flags = ((FLAG_FAULT if st.fault else 0)
                 | (FLAG_CLOSED_LOOP if st.mode is Mode.CLOSED_LOOP else 0)
                 | (FLAG_ARMED if st.armed else 0))
        payload = bytes([rpm & 0xFF, (rpm >> 8) & 0xFF, duty_byte, flags])
        return self._reply(frames.CMD_GET_STATUS, payload)

    def _reply(self, command: int, payload: bytes) -> bytes:
        return frames.encode_reply(self.address, command, payload)

    # --- per-PWM-period tick ---------------------------------------------

    def tick(self, t_now: float, motor: SwitchedMotor,
             vdc: float = 16.8) -> dict:
        """Advance firmware and plant through one PWM period.

        Returns the telemetry row for this period.
        """
        cfg = self.config
        st = self.state
        period = cfg.pwm_period
        t_end = t_now + period
        zc_flag = False

        if st.fault is not None or not st.armed or st.target_rpm <= 0.0:
            # safe state: everything floats
            st.duty = 0.0
            if st.mode is not Mode.IDLE:
                st.mode = Mode.IDLE
            motor.set_drive(PhaseDrive(COAST, max(vdc, 0.0)))
            motor.run(period, True)
            return self._row(t_now, motor, False, None)

        if st.mode is Mode.IDLE:
            if vdc <= 0.0:
                raise StartupFailure("no bus voltage")
            self._enter_align(t_now)

        if st.mode is Mode.ALIGN:
            st.duty = cfg.align_duty
            # alternate between two adjacent sectors: the rotor parks on the
            # shared well boundary, where both conduction pairs still see
            # back-EMF and keep damping the settle.  A single sector would
            # leave the rotor ringing at its equilibrium, where the
            # conducting pair's coupling (and so its damping) vanishes.  The
            # alternation is slower than the electrical time constant or the
            # carried-over loop current would cancel the damping it built.
            self._dither += 1
            st.sector = (cfg.align_sector
                         + (self._dither // cfg.align_dither_div) % 2) % 6
            if t_now - st.t_mode_entered >= cfg.t_align:
                self._enter_ramp(t_now)

        if st.mode is Mode.OPEN_LOOP_RAMP:
            rate = self._ramp_rate(t_now)
            omega_sync = rate * math.pi / (3.0 * self.pole_pairs)
            u = min((t_now - st.t_mode_entered) / cfg.t_ramp, 1.0)
            boost = cfg.ramp_duty + (cfg.ramp_duty_end - cfg.ramp_duty) * u
            # the back-EMF compensation fades in: the rotor only reaches
            # the synchronous speed partway through the catch, and feeding
            # it full volts while still slow just pumps current
            flux = min(1.0, 4.0 * u)
            st.duty = min(
                boost + flux * cfg.motor_kt * omega_sync / vdc, 0.5)
            if t_now - st.t_startup_began > cfg.t_startup_max:
                st.fault = "startup"
                raise StartupFailure(
                    f"no closed-loop handoff within {cfg.t_startup_max} s")

        # exact time of a commutation falling inside this period, if any
        t_comm: float | None = None
        comm_mode = st.mode
        if st.mode is Mode.OPEN_LOOP_RAMP:
            if st.t_next_forced <= t_now:
                t_comm = t_now
            elif st.t_next_forced < t_end:
                t_comm = st.t_next_forced
        elif st.mode is Mode.CLOSED_LOOP:
            if st.t_next_commutation is not None:
                if st.t_next_commutation <= t_now:
                    t_comm = t_now
                elif st.t_next_commutation < t_end:
                    t_comm = st.t_next_commutation
            elif self._stalled(t_now):
                # lost the crossing; step blind to keep the field rotating
                st.blind_commutations += 1
                t_comm = t_now

        # walk the period's events in time order, integrating the plant
        # between them (kinds: 0 sample, 1 on->off edge, 2 commutation)
        duty_eff = st.duty
        if st.soft_comm_left > 0:
            st.soft_comm_left -= 1
            duty_eff *= cfg.soft_comm_scale
        t_on_end = t_now + duty_eff * period
        events: list[tuple[float, int]] = [(t_on_end, 1)]
        if t_comm is not None:
            events.append((t_comm, 2))
        if duty_eff >= cfg.min_sample_duty:
            events.append((t_now + 0.5 * duty_eff * period, 0))
        events.sort()

        motor.set_drive(PhaseDrive(commutation_table(st.sector), vdc, duty_eff))
        t_cursor = t_now
        on = duty_eff > 0.0
        chopping = False
        tripped = False
        sampled_v: float | None = None

        def advance(t_to: float):
            # integrate to t_to; the power stage's comparator chops the
            # gate hysteretically against the current limit while the
            # PWM on window runs
            nonlocal t_cursor, on, chopping, tripped
            while True:
                seg = t_to - t_cursor
                if seg <= 0.0:
                    t_cursor = t_to
                    return
                if on:
                    ran = motor.run(seg, True, i_stop=cfg.i_limit)
                    if ran < seg - 1.0e-12:
                        t_cursor += ran
                        on = False
                        chopping = True
                        if not tripped:
                            tripped = True
                            st.current_trips += 1
                        continue
                elif chopping:
                    ran = motor.run(seg, False,
                                    i_floor=cfg.i_limit - cfg.chop_hysteresis)
                    if ran < seg - 1.0e-12:
                        t_cursor += ran
                        on = True
                        chopping = False
                        continue
                else:
                    motor.run(seg, False)
                t_cursor = t_to
                return

        try:
            for t_ev, kind in events:
                advance(t_ev)
                if kind == 1:
                    on = False
                    chopping = False
                elif kind == 2:
                    if st.mode is not comm_mode:
                        # a mid-period handoff invalidates the commutation
                        # this event was scheduled for
                        continue
                    self._commutate(t_ev)
                    if st.mode is Mode.OPEN_LOOP_RAMP:
                        st.t_next_forced = t_ev + 1.0 / self._ramp_rate(t_ev)
                    motor.set_drive(PhaseDrive(
                        commutation_table(st.sector), vdc, duty_eff))
                    st.soft_comm_left = cfg.soft_comm_periods
                elif on:
                    # comparator sampling is only valid while the gate
                    # actually drives the pair
                    sampled_v = motor.floating_voltage(True)
                    zc_flag = self._process_sample(sampled_v, vdc, t_ev)
            advance(t_end)
        except CurrentLimitFault:
            st.fault = "overcurrent"
            st.duty = 0.0
            motor.set_drive(PhaseDrive(COAST, vdc))
            return self._row(t_now, motor, False, sampled_v)

        # speed loop at the divided rate; new duty applies from next period
        self._loop_counter += 1
        if (st.mode is Mode.CLOSED_LOOP
                and self._loop_counter >= cfg.speed_loop_div):
            self._loop_counter = 0
            dt = cfg.speed_loop_div * period
            st.pi, duty_cmd = pi_speed_update(
                st.pi, st.target_rpm, st.speed_estimate_rpm, dt)
            slew = cfg.duty_slew_per_s * dt
            st.duty = min(max(duty_cmd, st.duty - slew), st.duty + slew)

        return self._row(t_now, motor, zc_flag, sampled_v)

    # --- internals --------------------------------------------------------

    def _enter_align(self, t_now: float):
        st = self.state
        st.mode = Mode.ALIGN
        st.t_mode_entered = t_now
        st.t_startup_began = t_now
        st.sector = self.config.align_sector
        st.duty = self.config.align_duty
        st.handoff_run = 0
        st.speed_estimate_rpm = 0.0
        st.zc_filter_window = ()
        st.zc_seen_this_sector = False
        st.t_zero_cross = None
        st.t_next_commutation = None
        st.prev_sample = None
        st.t_raw_cross = None

    def _enter_ramp(self, t_now: float):
        st = self.state
        st.mode = Mode.OPEN_LOOP_RAMP
        st.t_mode_entered = t_now
        # the dithered align parks the rotor on the boundary between the two
        # alternated wells; align_sector + 2 holds its torque equilibrium 90
        # electrical degrees ahead of that boundary, so the first energized
        # sector pulls forward with maximum torque
        st.sector = (self.config.align_sector + 2) % 6
        st.t_last_commutation = t_now
        st.t_next_forced = t_now + 1.0 / self.config.ramp_rate_start
        st.zc_seen_this_sector = False
        st.zc_filter_window = ()
        st.t_last_ramp_zc = None
        st.prev_sample = None
        st.t_raw_cross = None

    def _ramp_rate(self, t_now: float) -> float:
        cfg = self.config
        u = (t_now - self.state.t_mode_entered) / cfg.t_ramp
        u = min(max(u, 0.0), 1.0)
        return cfg.ramp_rate_start * (
            cfg.ramp_rate_end / cfg.ramp_rate_start) ** u

    def _stalled(self, t_now: float) -> bool:
        # use the slowest plausible cadence so a blind step never outruns
        # the rotor; repeated blind steps then back off geometrically
        st = self.state
        sector_time = 0.0
        if st.speed_estimate_rpm > 0.0:
            sector_time = 10.0 / (st.speed_estimate_rpm * self.pole_pairs)
        sector_time = max(sector_time, st.last_sector_duration)
        if sector_time <= 0.0:
            sector_time = 1.0 / self.config.ramp_rate_end
        return (t_now - st.t_last_commutation
                > self.config.stall_timeout_factor * sector_time)

    def _commutate(self, t_now: float):
        st = self.state
        if st.mode is Mode.OPEN_LOOP_RAMP and not st.zc_seen_this_sector:
            # a silent sector breaks the consecutive-crossing run
            st.handoff_run = 0
        if t_now > st.t_last_commutation:
            st.last_sector_duration = t_now - st.t_last_commutation
        st.sector = (st.sector + 1) % 6
        st.t_last_commutation = t_now
        st.t_zero_cross = None
        st.t_next_commutation = None
        st.zc_seen_this_sector = False
        st.armed_for_cross = False
        st.zc_filter_window = ()
        st.prev_sample = None
        st.t_raw_cross = None
        st.commutations += 1

    def _handoff(self, t_zc: float):
        """Crossings confirmed on enough consecutive sectors: go closed loop.

        Entered at the qualifying crossing itself.  The rotor has been
        following the forced cadence, so that cadence seeds the speed
        estimate, and the next commutation lands half a sector past the
        crossing regardless of where in the forced sector it fell; from
        there the crossing-driven timing is correctly phased.
        """
        st = self.state
        rate = self._ramp_rate(t_zc)
        st.mode = Mode.CLOSED_LOOP
        st.t_mode_entered = t_zc
        st.speed_estimate_rpm = rate * 10.0 / self.pole_pairs
        st.t_zero_cross = t_zc
        st.t_next_commutation = t_zc + 0.5 / rate
        st.pi = replace(st.pi, integrator=st.duty)
        self._loop_counter = 0

    def _process_sample(self, v_float: float, vdc: float,
                        t_sample: float) -> bool:
        st = self.state
        cfg = self.config
        if st.mode not in (Mode.OPEN_LOOP_RAMP, Mode.CLOSED_LOOP):
            return False
        verdict = sample_comparator(v_float, vdc, expected_rising(st.sector))
        if not verdict:
            st.armed_for_cross = True
        prev_verdict = st.zc_filter_window[-1] if st.zc_filter_window else False
        if verdict and not prev_verdict and st.prev_sample is not None:
            # the threshold was crossed between this sample and the last
            # one; interpolate for a sub-sample timestamp
            t_prev, v_prev = st.prev_sample
            dv = v_float - v_prev
            frac = 0.5 if dv == 0.0 else (0.5 * vdc - v_prev) / dv
            frac = min(max(frac, 0.0), 1.0)
            st.t_raw_cross = t_prev + frac * (t_sample - t_prev)
        st.prev_sample = (t_sample, v_float)
        window = (st.zc_filter_window + (verdict,))[-cfg.filter_window:]
        st.zc_filter_window = window
        if not st.armed_for_cross:
            return False
        if len(window) < cfg.filter_window or not majority_filter(window):
            return False
        if st.mode is Mode.OPEN_LOOP_RAMP:
            if st.zc_seen_this_sector:
                return False
            # a synchronized rotor yields one crossing per forced sector at
            # a steady spacing; a rotor still swinging at the pattern yields
            # crossings at wild intervals.  Where inside the sector the
            # crossing falls says nothing (it shifts with load angle), so
            # only the spacing is checked.
            span = st.t_next_forced - st.t_last_commutation
            if st.t_last_ramp_zc is not None and span > 0.0:
                ratio = (t_sample - st.t_last_ramp_zc) / span
                if not 0.5 <= ratio <= 1.6:
                    st.t_last_ramp_zc = t_sample
                    st.handoff_run = 0
                    return False
            st.t_last_ramp_zc = t_sample
            st.zc_seen_this_sector = True
            st.handoff_run += 1
            if st.handoff_run >= cfg.handoff_sectors:
                self._handoff(t_sample)
            return True
        if st.t_zero_cross is not None:
            # already latched this sector; a repeated majority is not a
            # new crossing
            return False
        # time the crossing from the interpolated raw flip; if no usable
        # bracket exists, fall back to half a sample before the oldest
        # sample of the confirming true run
        run = 0
        for sample in reversed(window):
            if not sample:
                break
            run += 1
        t_cross = st.t_raw_cross
        if t_cross is None or not st.t_last_commutation < t_cross <= t_sample:
            t_cross = t_sample - (run - 0.5) * cfg.pwm_period
        on_zero_cross(st, t_cross, self.pole_pairs, cfg.speed_est_alpha,
                      cfg.min_zc_interval_periods * cfg.pwm_period,
                      cfg.comm_correction_ticks * cfg.pwm_period)
        return True

    def _row(self, t_now: float, motor: SwitchedMotor, zc_flag: bool,
             sampled_v: float | None) -> dict:
        st = self.state
        if sampled_v is None:
            sampled_v = motor.floating_voltage(True)
        return {
            "t": t_now,
            "sector": st.sector,
            "duty": st.duty,
            "floating_v": sampled_v,
            "zc_flag": int(zc_flag),
            "speed_est": st.speed_estimate_rpm,
            "speed_true": motor.rpm,
            "i_dc": motor.loop_current(),
        }


BENCH_INERTIA = 4.0e-6      # bare rotor bell, no propeller
BENCH_DAMPING = 1.5e-4      # dynamometer brake, N m s per rad/s
BENCH_BRAKE_CAP = 0.028     # brake torque saturates here, N m


def bench_brake(omega: float) -> float:
    """Dynamometer brake torque: viscous, saturating at the cap."""
    t = BENCH_DAMPING * omega
    return min(max(t, -BENCH_BRAKE_CAP), BENCH_BRAKE_CAP)


def run_bench(target_rpm: float, duration: float,
              config: EscConfig | None = None, pole_pairs: int = 2,
              vdc: float = 16.8, load_torque=None) -> list[dict]:
    """Standalone controller + motor run; returns one row per PWM period.

    The default two-pole-pair plant keeps many PWM samples inside each
    commutation sector across the whole tested speed range, which the
    crossing detector needs; flight motors use their real pole count in
    the averaged tier where commutation is ideal.

    The default load is a viscous dynamometer brake with a torque cap.
    A completely unloaded rotor is not a usable sensorless test article:
    between commutations it oscillates about the torque equilibrium,
    where the conducting pair's back-EMF coupling vanishes, so nothing
    damps the swing and the startup ramp never synchronizes.  Any loaded
    rotor runs behind the equilibrium at a load angle with live
    coupling, and the swing dies out.  Uncapped, though, the viscous
    drag at high speed pushes the mean current high enough that the
    sector-edge back-EMF droop of the trapezoid lifts the peaks into the
    power stage's abort level, so the brake saturates above the startup
    speed range.
    """
    from .motor import MotorParams, MotorState

    cfg = config or EscConfig()
    params = MotorParams(kv=530.0, r_phase=0.075, l_phase=1.0e-5,
                         i_max=10.0, pole_pairs=pole_pairs,
                         rotor_inertia=BENCH_INERTIA)
    if load_torque is None:
        load_torque = bench_brake
    motor = SwitchedMotor(params, MotorState(), load=load_torque)
    esc = EscController(address=1, config=cfg, pole_pairs=pole_pairs)
    esc.handle_frame(frames.encode_command(
        frames.CommandFrame(1, frames.CMD_ARM)))
    esc.handle_frame(frames.encode_command(
        frames.CommandFrame.set_speed(1, int(round(target_rpm)))))
    n = round(duration / cfg.pwm_period)
    rows = []
    for i in range(n):
        rows.append(esc.tick(i * cfg.pwm_period, motor, vdc))
    return rows
