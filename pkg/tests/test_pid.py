"""Axis PID and relay auto-tuning.

The tuning oracle is a triple first-order lag, the minimal plant whose
ultimate gain and period have closed forms: at the phase crossover each
pole contributes 60 degrees, so w = sqrt(3) rad/s, |G| = 1/8, giving
Ku = 8 and Tu = 2*pi/sqrt(3).
"""

from __future__ import annotations

import math
import random

import pytest

from hexastack import pid
from hexastack.errors import NoOscillation, ValidationError

KU_EXACT = 8.0
TU_EXACT = 2.0 * math.pi / math.sqrt(3.0)


class TripleLag:
    """y/u = 1/(s+1)^3, stepped with the exact exponential update."""

    def __init__(self, dt: float):
        self.decay = math.exp(-dt)
        self.x = [0.0, 0.0, 0.0]

    def __call__(self, u: float) -> float:
        gain = 1.0 - self.decay
        x1, x2, x3 = self.x
        x1 += (u - x1) * gain
        x2 += (x1 - x2) * gain
        x3 += (x2 - x3) * gain
        self.x = [x1, x2, x3]
        return x3


# -------------------------------------------------------------- pid_update


def test_zero_error_zero_command():
    loop = pid.AxisPid(kp=3.0, ki=1.0, kd=0.5)
    loop, cmd = pid.pid_update(loop, 10.0, 10.0, 0.0, 0.002)
    assert cmd == 0.0


def test_proportional_literal():
    loop = pid.AxisPid(kp=2.0)
    _, cmd = pid.pid_update(loop, 1.0, 0.5, 0.0, 0.002)
    assert cmd == 1.0


def test_derivative_acts_on_measured_rate():
    # no setpoint kick: with kp = ki = 0 the command depends on the
    # body rate alone, whatever the setpoint does
    loop = pid.AxisPid(kp=0.0, ki=0.0, kd=3.0)
    _, cmd_a = pid.pid_update(loop, 0.0, 0.0, 2.0, 0.002)
    _, cmd_b = pid.pid_update(loop, 90.0, 0.0, 2.0, 0.002)
    assert cmd_a == -6.0
    assert cmd_b == cmd_a


def test_integrator_accumulates():
    loop = pid.AxisPid(kp=0.0, ki=1.0)
    for _ in range(3):
        loop, cmd = pid.pid_update(loop, 0.5, 0.0, 0.0, 0.1)
    assert loop.integrator == pytest.approx(0.15)
    assert cmd == pytest.approx(0.15)


def test_output_clamped_exactly():
    loop = pid.AxisPid(kp=1000.0, output_limit=500.0)
    _, cmd = pid.pid_update(loop, 10.0, 0.0, 0.0, 0.002)
    assert cmd == 500.0
    _, cmd = pid.pid_update(loop, -10.0, 0.0, 0.0, 0.002)
    assert cmd == -500.0


def test_antiwindup_bounds_integrator():
    loop = pid.AxisPid(kp=0.0, ki=10.0, output_limit=5.0)
    for _ in range(1000):
        loop, cmd = pid.pid_update(loop, 10.0, 0.0, 0.0, 0.01)
        assert abs(cmd) <= 5.0
    assert abs(loop.integrator) <= 5.0
    # and it recovers once the error flips
    for _ in range(1000):
        loop, _ = pid.pid_update(loop, -10.0, 0.0, 0.0, 0.01)
    assert loop.integrator == -5.0


def test_command_always_within_limit():
    rng = random.Random(19)
    loop = pid.AxisPid(kp=4.0, ki=2.0, kd=1.0, output_limit=100.0)
    for _ in range(2000):
        loop, cmd = pid.pid_update(loop, rng.uniform(-50.0, 50.0),
                                   rng.uniform(-50.0, 50.0),
                                   rng.uniform(-200.0, 200.0), 0.002)
        assert abs(cmd) <= 100.0


def test_bad_dt_rejected():
    loop = pid.AxisPid(kp=1.0)
    with pytest.raises(ValidationError):
        pid.pid_update(loop, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        pid.pid_update(loop, 0.0, 0.0, 0.0, -0.001)


def test_update_does_not_mutate_input():
    loop = pid.AxisPid(kp=1.0, ki=1.0)
    pid.pid_update(loop, 1.0, 0.0, 0.0, 0.1)
    assert loop.integrator == 0.0


# ---------------------------------------------------------------- autotune


def test_relay_measures_triple_lag_ultimate_point():
    plant = TripleLag(dt=0.001)
    ku, tu = pid.measure_ultimate(plant, amplitude=1.0, dt=0.001,
                                  t_max=60.0)
    assert ku == pytest.approx(KU_EXACT, rel=0.10)
    assert tu == pytest.approx(TU_EXACT, rel=0.10)


def test_relay_measurement_deterministic():
    a = pid.measure_ultimate(TripleLag(0.001), 1.0, 0.001, 60.0)
    b = pid.measure_ultimate(TripleLag(0.001), 1.0, 0.001, 60.0)
    assert a == b


def test_zero_amplitude_no_oscillation():
    with pytest.raises(NoOscillation):
        pid.measure_ultimate(TripleLag(0.001), 0.0, 0.001, 5.0)


def test_dead_plant_no_oscillation():
    with pytest.raises(NoOscillation):
        pid.measure_ultimate(lambda u: 0.0, 1.0, 0.001, 5.0)


def test_ziegler_nichols_formulas():
    kp, ki, kd = pid.ziegler_nichols(8.0, 3.6)
    assert kp == 0.6 * 8.0
    assert ki == 1.2 * 8.0 / 3.6
    assert kd == 0.075 * 8.0 * 3.6


def test_autotune_returns_zn_gains_for_measured_point():
    plant = TripleLag(dt=0.001)
    kp, ki, kd = pid.autotune(plant, amplitude=1.0, dt=0.001, t_max=60.0)
    ku = kp / 0.6
    tu = 1.2 * ku / ki
    assert ku == pytest.approx(KU_EXACT, rel=0.10)
    assert tu == pytest.approx(TU_EXACT, rel=0.10)
    assert kd == pytest.approx(0.075 * ku * tu)
