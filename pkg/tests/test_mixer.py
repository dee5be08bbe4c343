"""Motor mixer: weight tables, thrust preservation, saturation order."""

from __future__ import annotations

import math
import random

import pytest

from hexastack import mixer
from hexastack.errors import ValidationError

S60 = math.sqrt(3.0) / 2.0


# ---------------------------------------------------------------- geometry


def test_default_weight_tables_exact():
    g = mixer.MixerGeometry()
    assert g.roll_weights == (0.0, S60, S60, 0.0, -S60, -S60)
    assert g.pitch_weights == (1.0, 0.5, -0.5, -1.0, -0.5, 0.5)
    assert g.spin == (1, -1, 1, -1, 1, -1)


def test_decoupling_identities_exact():
    # cross sums vanish to the last bit, term by term in pairs
    g = mixer.MixerGeometry()
    r, p, s = g.roll_weights, g.pitch_weights, g.spin
    assert math.fsum(r) == 0.0
    assert math.fsum(p) == 0.0
    assert math.fsum(ri * pi for ri, pi in zip(r, p)) == 0.0
    assert math.fsum(ri * si for ri, si in zip(r, s)) == 0.0
    assert math.fsum(pi * si for pi, si in zip(p, s)) == 0.0


def test_spin_must_cancel():
    with pytest.raises(ValidationError):
        mixer.MixerGeometry(spin=(1, 1, 1, -1, -1, 1))


def test_arm_and_spin_counts_must_match():
    with pytest.raises(ValidationError):
        mixer.MixerGeometry(arm_angles_deg=(0.0, 90.0, 180.0, 270.0))


# --------------------------------------------------------------------- mix


def test_equal_speed_case():
    assert mixer.mix(4000.0, 0.0, 0.0, 0.0) == (4000.0,) * 6


def test_roll_command_literal():
    pts = mixer.mix(4000.0, 300.0, 0.0, 0.0)
    assert [round(p, 1) for p in pts] == [
        4000.0, 4259.8, 4259.8, 4000.0, 3740.2, 3740.2]
    # the two motors on the roll axis do not move
    assert pts[0] == 4000.0
    assert pts[3] == 4000.0


def test_yaw_command_three_up_three_down():
    pts = mixer.mix(4000.0, 0.0, 0.0, 200.0)
    assert sorted(pts) == [3800.0] * 3 + [4200.0] * 3
    assert math.fsum(pts) == 24000.0


def test_pitch_touches_all_six():
    pts = mixer.mix(4000.0, 0.0, 200.0, 0.0)
    assert all(p != 4000.0 for p in pts)
    assert pts[0] == 4200.0
    assert pts[3] == 3800.0


def test_roll_changes_exactly_four_of_six():
    rng = random.Random(5)
    for _ in range(200):
        t = float(rng.randrange(1000, 8000))
        r = rng.uniform(1.0, 1500.0) * rng.choice((-1.0, 1.0))
        pts = mixer.mix(t, r, 0.0, 0.0)
        assert sum(1 for p in pts if p != t) == 4


def test_thrust_sum_exact_on_worked_tuples():
    for t, r, p, y in [(4000.0, 0.0, 0.0, 0.0),
                       (4000.0, 300.0, 0.0, 0.0),
                       (4000.0, 0.0, 0.0, 200.0),
                       (5000.0, -123.0, 77.0, -45.0),
                       (0.0, 0.0, 0.0, 0.0),
                       (6500.5, 500.25, -499.75, 250.125)]:
        assert math.fsum(mixer.mix(t, r, p, y)) == 6.0 * t


def test_thrust_sum_exact_random():
    # throttle on a 2^-10 rpm grid, commands arbitrary floats
    rng = random.Random(23)
    for _ in range(2000):
        t = rng.randrange(0, 9000 * 1024) / 1024.0
        r = rng.uniform(-2000.0, 2000.0)
        p = rng.uniform(-2000.0, 2000.0)
        y = rng.uniform(-2000.0, 2000.0)
        pts = mixer.mix(t, r, p, y)
        assert math.fsum(pts) == 6.0 * t
        assert sum(pts) == 6.0 * t


def test_quantization_is_below_bus_resolution():
    pts = mixer.mix(4000.0, 300.0, 0.0, 0.0)
    assert abs(pts[1] - (4000.0 + 300.0 * S60)) < 1.0e-6


def test_negative_throttle_rejected():
    with pytest.raises(ValidationError):
        mixer.mix(-1.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------- saturate


def test_saturate_inside_limits_is_identity():
    args = (4000.0, 100.0, -50.0, 30.0)
    assert mixer.saturate(*args, 3000.0, 5000.0) == mixer.mix(*args)


def test_saturate_sheds_yaw_first():
    # yaw pushes the fast motors 100 rpm over the ceiling
    pts = mixer.saturate(4000.0, 0.0, 0.0, 600.0, 3000.0, 4500.0)
    assert 4500.0 - 1.0e-3 < max(pts) <= 4500.0
    assert min(pts) >= 3000.0
    # still three up, three down along the spin pattern
    up = [pts[i] for i in (0, 2, 4)]
    down = [pts[i] for i in (1, 3, 5)]
    assert all(u > 4000.0 for u in up)
    assert all(d < 4000.0 for d in down)


def test_saturate_preserves_roll_while_shedding_yaw():
    pts = mixer.saturate(4000.0, 300.0, 0.0, 600.0, 3000.0, 4800.0)
    assert 4800.0 - 1.0e-3 < max(pts) <= 4800.0
    # spin signs cancel inside this projection, leaving pure roll
    roll_proj = (pts[1] + pts[2] - pts[4] - pts[5]) / 4.0
    assert roll_proj == pytest.approx(300.0 * S60, abs=1.0e-3)


def test_saturate_drops_yaw_then_scales_roll():
    pts = mixer.saturate(4600.0, 600.0, 0.0, 50.0, 0.0, 5000.0)
    assert 5000.0 - 1.0e-3 < max(pts) <= 5000.0
    # yaw fully shed: no component left along the spin pattern
    g = mixer.MixerGeometry()
    assert math.fsum(p * s for p, s in zip(pts, g.spin)) == 0.0
    # roll-null motors stay at throttle
    assert pts[0] == 4600.0
    assert pts[3] == 4600.0


def test_saturate_clips_throttle_last():
    assert mixer.saturate(6000.0, 0.0, 0.0, 0.0, 3000.0, 5000.0) == (5000.0,) * 6
    assert mixer.saturate(100.0, 0.0, 0.0, 0.0, 300.0, 5000.0) == (300.0,) * 6


def test_saturate_limit_validation():
    with pytest.raises(ValidationError):
        mixer.saturate(4000.0, 0.0, 0.0, 0.0, -1.0, 5000.0)
    with pytest.raises(ValidationError):
        mixer.saturate(4000.0, 0.0, 0.0, 0.0, 5000.0, 5000.0)


def test_saturate_random_always_feasible():
    rng = random.Random(41)
    for _ in range(300):
        t = rng.uniform(0.0, 9000.0)
        r = rng.uniform(-3000.0, 3000.0)
        p = rng.uniform(-3000.0, 3000.0)
        y = rng.uniform(-3000.0, 3000.0)
        pts = mixer.saturate(t, r, p, y, 1000.0, 8000.0)
        assert all(1000.0 <= v <= 8000.0 for v in pts)
