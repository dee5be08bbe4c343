"""Rigid-body physics, sensor synthesis, battery, and GPS readout."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hexastack import airframe
from hexastack.errors import NonFiniteState, ValidationError
from hexastack.mixer import MixerGeometry

GEO = MixerGeometry()
PARAMS = airframe.VehicleParams()
DT = 0.001


def hover_forces(params: airframe.VehicleParams,
                 delta: tuple[float, ...] = (0.0,) * 6):
    per_motor = params.mass * airframe.G / 6.0
    out = []
    for d in delta:
        thrust = per_motor + d
        out.append((thrust, 0.016 * thrust))
    return tuple(out)


def airborne(alt: float = 10.0) -> airframe.VehicleState:
    return airframe.VehicleState(position=(0.0, 0.0, alt))


# ------------------------------------------------------------- parameters


def test_payload_limit():
    airframe.VehicleParams(payload=4.0)
    with pytest.raises(ValidationError):
        airframe.VehicleParams(payload=4.1)
    with pytest.raises(ValidationError):
        airframe.VehicleParams(payload=-0.1)


def test_physical_constants_positive():
    with pytest.raises(ValidationError):
        airframe.VehicleParams(k_thrust=0.0)
    with pytest.raises(ValidationError):
        airframe.VehicleParams(inertia=(0.03, -0.01, 0.05))


def test_prop_forces_quadratic_law():
    p = airframe.VehicleParams(k_thrust=1.3e-5, k_drag=1.3e-5 * 0.016)
    assert airframe.prop_forces(0.0, p) == (0.0, 0.0)
    t1, q1 = airframe.prop_forces(100.0, p)
    t2, q2 = airframe.prop_forces(200.0, p)
    assert t1 == pytest.approx(0.13)
    assert t2 == pytest.approx(4.0 * t1)
    assert q1 == pytest.approx(0.016 * t1)
    assert q2 > q1
    with pytest.raises(ValidationError):
        airframe.prop_forces(-1.0, p)


# ------------------------------------------------------------- rigid body


def test_hover_equilibrium_holds():
    st = airborne()
    forces = hover_forces(PARAMS)
    for _ in range(1000):
        st = airframe.step_rigid_body(st, forces, GEO, PARAMS, DT)
    assert max(abs(v) for v in st.velocity) < 1.0e-9
    assert st.position[2] == pytest.approx(10.0, abs=1.0e-9)


def test_one_percent_excess_thrust_accelerates_at_one_percent_g():
    st = airborne()
    per = 1.01 * PARAMS.mass * airframe.G / 6.0
    forces = ((per, 0.0),) * 6
    st = airframe.step_rigid_body(st, forces, GEO, PARAMS, DT)
    accel = st.velocity[2] / DT
    assert accel == pytest.approx(0.01 * airframe.G, rel=1.0e-9)


def test_roll_pattern_gives_pure_roll_moment():
    st = airborne()
    delta = (0.0, 0.1, 0.1, 0.0, -0.1, -0.1)
    forces = hover_forces(PARAMS, delta)
    st = airframe.step_rigid_body(st, forces, GEO, PARAMS, DT)
    p, q, r = st.body_rates
    assert p > 0.0
    assert abs(q) < 1.0e-9
    assert abs(r) < 1.0e-9


def test_equal_speed_reaction_torques_cancel():
    st = airborne()
    forces = hover_forces(PARAMS)
    for _ in range(500):
        st = airframe.step_rigid_body(st, forces, GEO, PARAMS, DT)
    assert abs(st.body_rates[2]) < 1.0e-9
    assert abs(st.attitude[2]) < 1.0e-9


def test_grounded_until_thrust_beats_weight():
    st = airframe.VehicleState()
    per = 0.5 * PARAMS.mass * airframe.G / 6.0
    for _ in range(100):
        st = airframe.step_rigid_body(st, ((per, 0.001),) * 6, GEO,
                                      PARAMS, DT)
    assert st.position == (0.0, 0.0, 0.0)
    assert st.velocity == (0.0, 0.0, 0.0)
    assert st.attitude == (0.0, 0.0, 0.0)


def test_takeoff_leaves_the_ground():
    st = airframe.VehicleState()
    per = 1.2 * PARAMS.mass * airframe.G / 6.0
    for _ in range(200):
        st = airframe.step_rigid_body(st, ((per, 0.0),) * 6, GEO, PARAMS, DT)
    assert st.position[2] > 0.0
    assert st.velocity[2] > 0.0


def test_non_finite_input_is_fatal():
    with pytest.raises(NonFiniteState):
        airframe.step_rigid_body(airborne(), ((math.nan, 0.0),) * 6,
                                 GEO, PARAMS, DT)


def test_flight_tier_step_bound():
    with pytest.raises(ValidationError):
        airframe.step_rigid_body(airborne(), hover_forces(PARAMS), GEO,
                                 PARAMS, 0.002)


def simulate_maneuver(dt: float) -> list[tuple[float, float, float]]:
    """10 s scripted force schedule, returns sampled positions."""
    st = airborne(20.0)
    per = PARAMS.mass * airframe.G / 6.0
    samples = []
    steps = int(round(10.0 / dt))
    for k in range(steps):
        t = k * dt
        lift = per * (1.0 + 0.05 * math.sin(2.0 * math.pi * t / 5.0))
        tilt = 0.02 * per * math.sin(2.0 * math.pi * t / 3.0)
        delta = (0.0, tilt, tilt, 0.0, -tilt, -tilt)
        forces = tuple((lift + d, 0.016 * (lift + d)) for d in delta)
        st = airframe.step_rigid_body(st, forces, GEO, PARAMS, dt)
        if (t + dt) % 0.5 < dt / 2 or abs((t + dt) % 0.5 - 0.5) < dt / 2:
            samples.append(st.position)
    return samples


def test_step_halving_converges():
    coarse = simulate_maneuver(0.001)
    fine = simulate_maneuver(0.0005)
    assert len(coarse) == len(fine)
    scale = max(max(abs(c) for c in p) for p in fine)
    worst = max(max(abs(a - b) for a, b in zip(pc, pf))
                for pc, pf in zip(coarse, fine))
    assert worst / scale < 0.005


# ---------------------------------------------------------------- sensors


def test_level_static_sensors_exact():
    accel, gyro, mag = airframe.synth_sensors(airborne())
    assert accel == (0.0, -0.0, -1.0) or accel == (0.0, 0.0, -1.0)
    assert gyro == (0.0, 0.0, 0.0)
    assert mag[0] == pytest.approx(1.0)


def test_thirty_degree_roll_projection():
    st = airframe.VehicleState(attitude=(30.0, 0.0, 0.0))
    accel, _, _ = airframe.synth_sensors(st)
    assert accel[0] == pytest.approx(0.0, abs=1.0e-12)
    assert accel[1] == pytest.approx(-0.5)
    assert accel[2] == pytest.approx(-math.sqrt(3.0) / 2.0)


def test_sensor_noise_streams_repeat_with_seed():
    st = airborne()
    noise = airframe.NoiseConfig(accel_sigma=0.02, gyro_sigma=0.5,
                                 mag_sigma=0.01)
    r1 = airframe.sensor_rng(9)
    r2 = airframe.sensor_rng(9)
    s1 = [airframe.synth_sensors(st, noise, r1) for _ in range(50)]
    s2 = [airframe.synth_sensors(st, noise, r2) for _ in range(50)]
    assert s1 == s2


def test_noise_magnitude_matches_config():
    st = airborne()
    noise = airframe.NoiseConfig(gyro_sigma=0.5)
    rng = airframe.sensor_rng(3)
    samples = [airframe.synth_sensors(st, noise, rng)[1][0]
               for _ in range(2000)]
    assert np.std(samples) == pytest.approx(0.5, rel=0.1)
    assert np.mean(samples) == pytest.approx(0.0, abs=0.05)


def test_noisy_sampling_requires_generator():
    with pytest.raises(ValidationError):
        airframe.synth_sensors(airborne(), airframe.NoiseConfig(), None)


# ---------------------------------------------------------------- battery


def test_hundred_watts_for_thirty_six_seconds():
    b = airframe.BatteryState()
    for _ in range(36):
        b = airframe.battery_step(b, 100.0, 1.0)
    assert b.capacity_full - b.energy_remaining == pytest.approx(1.0)


def test_idle_draw_below_one_percent_per_hour():
    b = airframe.BatteryState()
    b = airframe.battery_step(b, airframe.AVIONICS_POWER_W, 3600.0)
    used = b.capacity_full - b.energy_remaining
    assert used == pytest.approx(0.85)
    assert used / b.capacity_full < 0.01


def test_full_power_depletion_time_near_six_minutes():
    minutes = airframe.BATTERY_CAPACITY_WH / 987.84 * 60.0
    assert minutes == pytest.approx(5.92, abs=0.05)


def test_energy_never_negative_and_monotone():
    b = airframe.BatteryState(energy_remaining=0.01)
    prev = b.energy_remaining
    for _ in range(100):
        b = airframe.battery_step(b, 500.0, 1.0)
        assert b.energy_remaining <= prev
        prev = b.energy_remaining
    assert b.energy_remaining == 0.0
    assert b.depleted


def test_negative_power_rejected():
    with pytest.raises(ValidationError):
        airframe.battery_step(airframe.BatteryState(), -1.0, 1.0)


# -------------------------------------------------------------------- gps


def test_gps_origin_and_north_offset():
    lat0, lon0, alt0 = airframe.GPS_ORIGIN
    assert airframe.gps_stub(airframe.VehicleState()) == (lat0, lon0, alt0)
    st = airframe.VehicleState(position=(111.0, 0.0, 0.0))
    lat, lon, _ = airframe.gps_stub(st)
    assert lat - lat0 == pytest.approx(0.001, abs=1.0e-6)
    assert lon == lon0


def test_gps_altitude_passthrough():
    st = airframe.VehicleState(position=(0.0, 0.0, 10.0))
    assert airframe.gps_stub(st)[2] == airframe.GPS_ORIGIN[2] + 10.0
