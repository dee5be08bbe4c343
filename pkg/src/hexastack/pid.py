"""Per-axis PID with anti-windup, plus relay-feedback auto-tuning.

The controller is positional PID with the derivative taken on the
measured body rate, so setpoint steps do not kick the output.  Tuning
runs a relay experiment against a plant callable and converts the
measured ultimate point into classic Ziegler-Nichols gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .errors import NoOscillation, ValidationError


@dataclass(frozen=True)
class AxisPid:
    """Gains and running state for one attitude axis."""

    kp: float
    ki: float = 0.0
    kd: float = 0.0
    output_limit: float = 1500.0
    integrator: float = 0.0
    last_error: float = 0.0


def pid_update(loop: AxisPid, setpoint: float, measured: float,
               rate: float, dt: float) -> tuple[AxisPid, float]:
    """One control step; returns the advanced loop and its command.

    command = kp*e + integrator + kd*(-rate).  The integrator is
    clamped to the output limit, which bounds windup under persistent
    error, and the whole command is clamped to the same limit.
    """
    if dt <= 0.0:
        raise ValidationError("dt must be positive", key="dt")
    error = setpoint - measured
    lim = loop.output_limit
    integ = loop.integrator + loop.ki * error * dt
    integ = min(max(integ, -lim), lim)
    command = loop.kp * error + integ + loop.kd * (-rate)
    command = min(max(command, -lim), lim)
    return replace(loop, integrator=integ, last_error=error), command


def measure_ultimate(plant: Callable[[float], float], amplitude: float,
                     dt: float, t_max: float = 60.0,
                     cycles: int = 5) -> tuple[float, float]:
    """Relay-feedback experiment: returns (ultimate gain, period).

    Drives the plant with a +/-amplitude relay about zero and watches
    the limit cycle.  The period comes from upward zero crossings of
    the output (sub-step interpolated) and the gain from the relay
    describing function Ku = 4*amplitude / (pi * cycle_amplitude),
    both averaged over the last `cycles` full cycles.
    """
    if amplitude < 0.0:
        raise ValidationError("relay amplitude must be non-negative",
                              key="amplitude")
    if dt <= 0.0 or t_max <= 0.0:
        raise ValidationError("dt and t_max must be positive", key="dt")
    steps = int(round(t_max / dt))
    y_prev = 0.0
    crossings: list[float] = []
    # output extrema between consecutive upward crossings
    peaks: list[float] = []
    lo = hi = 0.0
    for k in range(steps):
        u = amplitude if y_prev < 0.0 else -amplitude
        y = plant(u)
        t = (k + 1) * dt
        if y_prev < 0.0 <= y:
            crossings.append(t - dt * y / (y - y_prev))
            peaks.append(0.5 * (hi - lo))
            lo = hi = y
        else:
            lo = min(lo, y)
            hi = max(hi, y)
        y_prev = y
    # first interval is start-up, first peak window is pre-crossing junk
    if len(crossings) < cycles + 2:
        raise NoOscillation("relay produced no sustained limit cycle")
    periods = [b - a for a, b in zip(crossings[:-1], crossings[1:])]
    tu = sum(periods[-cycles:]) / cycles
    amp = sum(peaks[-cycles:]) / cycles
    if amp <= 0.0 or tu <= 0.0:
        raise NoOscillation("limit cycle amplitude collapsed")
    ku = 4.0 * amplitude / (math.pi * amp)
    return ku, tu


def ziegler_nichols(ku: float, tu: float) -> tuple[float, float, float]:
    """Classic ZN PID gains from the ultimate gain and period."""
    return 0.6 * ku, 1.2 * ku / tu, 0.075 * ku * tu


def autotune(plant: Callable[[float], float], amplitude: float, dt: float,
             t_max: float = 60.0) -> tuple[float, float, float]:
    """Relay experiment followed by the ZN conversion."""
    ku, tu = measure_ultimate(plant, amplitude, dt, t_max)
    return ziegler_nichols(ku, tu)
