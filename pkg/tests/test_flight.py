"""Control-step dispatch and manual-override arbitration."""

from __future__ import annotations

import pytest

from hexastack import flight, frames
from hexastack.attitude import AttitudeState
from hexastack.errors import DisarmedError, ValidationError

LEVEL = AttitudeState()


def armed_controller() -> flight.FlightController:
    fc = flight.FlightController()
    fc.arm()
    return fc


def test_disarmed_step_raises():
    fc = flight.FlightController()
    with pytest.raises(DisarmedError):
        fc.control_step(LEVEL, flight.PilotCommand(throttle=4000.0))


def test_rate_definition():
    assert round(1.0 / flight.CONTROL_DT) == 500


def test_level_hover_emits_hover_speed_everywhere():
    fc = armed_controller()
    cmds = fc.control_step(LEVEL, flight.PilotCommand(throttle=4660.0))
    assert len(cmds) == 6
    assert [c.address for c in cmds] == [1, 2, 3, 4, 5, 6]
    for c in cmds:
        assert c.command == frames.CMD_SET_SPEED
        assert c.rpm == 4660


def test_roll_error_spares_the_roll_axis_motors():
    fc = armed_controller()
    att = AttitudeState(roll=-5.0)
    cmds = fc.control_step(att, flight.PilotCommand(throttle=4000.0))
    rpms = [c.rpm for c in cmds]
    # motors on the roll axis hold throttle; the left pair speeds up
    assert rpms[0] == 4000
    assert rpms[3] == 4000
    assert rpms[1] > 4000 and rpms[2] > 4000
    assert rpms[4] < 4000 and rpms[5] < 4000


def test_yaw_error_takes_the_short_way():
    fc = armed_controller()
    att = AttitudeState(yaw=170.0)
    cmds = fc.control_step(att, flight.PilotCommand(yaw=-170.0,
                                                    throttle=4000.0))
    rpms = [c.rpm for c in cmds]
    # wrapped error is +20 degrees, so the clockwise-spinning trio
    # (motors 1, 3, 5) speeds up
    assert rpms[0] > 4000 and rpms[2] > 4000 and rpms[4] > 4000
    assert rpms[1] < 4000 and rpms[3] < 4000 and rpms[5] < 4000


def test_setpoints_always_within_motor_envelope():
    fc = armed_controller()
    att = AttitudeState(roll=-80.0, pitch=60.0, yaw=150.0,
                        body_rates=(200.0, -150.0, 90.0))
    for _ in range(50):
        cmds = fc.control_step(att, flight.PilotCommand(throttle=7500.0))
        for c in cmds:
            assert flight.DEFAULT_OMEGA_MIN <= c.rpm <= flight.DEFAULT_OMEGA_MAX


def test_emitted_frames_survive_the_wire():
    fc = armed_controller()
    for cmd in fc.control_step(LEVEL, flight.PilotCommand(throttle=4321.0)):
        again = frames.decode_command(frames.encode_command(cmd))
        assert again == cmd


def test_control_is_deterministic():
    def run():
        fc = armed_controller()
        att = AttitudeState(roll=3.0, pitch=-2.0, body_rates=(5.0, 1.0, 0.0))
        out = []
        for _ in range(20):
            out.append([c.rpm for c in fc.control_step(
                att, flight.PilotCommand(throttle=4500.0))])
        return out
    assert run() == run()


def test_set_gains_validates_axis():
    fc = flight.FlightController()
    fc.set_gains("roll", 10.0, 2.0, 4.0)
    assert fc.roll.kp == 10.0
    with pytest.raises(ValidationError):
        fc.set_gains("altitude", 1.0, 0.0, 0.0)


# ---------------------------------------------------------------- override


def test_fresh_manual_wins():
    manual = flight.PilotCommand(roll=5.0, t=1.00)
    mission = flight.PilotCommand(roll=0.0, t=0.0)
    src, cmd = flight.manual_override(mission, manual, 1.10, 4660.0)
    assert src is flight.CommandSource.MANUAL
    assert cmd is manual


def test_stale_manual_reverts_to_mission():
    manual = flight.PilotCommand(roll=5.0, t=1.00)
    mission = flight.PilotCommand(roll=0.0, t=0.0)
    src, cmd = flight.manual_override(mission, manual, 1.30, 4660.0)
    assert src is flight.CommandSource.MISSION
    assert cmd is mission


def test_no_source_falls_back_to_hover_hold():
    src, cmd = flight.manual_override(None, None, 2.0, 4660.0)
    assert src is flight.CommandSource.HOVER_HOLD
    assert (cmd.roll, cmd.pitch, cmd.yaw, cmd.throttle) == (0.0, 0.0, 0.0,
                                                            4660.0)
