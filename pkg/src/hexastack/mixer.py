"""Motor allocation: (throttle, roll, pitch, yaw) commands to six rpm
setpoints over the hexagonal arm geometry.

Arm angles are measured from the front arm; motor 1 points forward and
the numbering runs clockwise seen from above.  Trigonometric weights
are snapped to exact forms (0, 1/2, sqrt(3)/2, 1) so the cancellation
identities behind thrust preservation hold to the last bit.
"""

from __future__ import annotations

import math

from .errors import ValidationError

_S60 = math.sqrt(3.0) / 2.0
_EXACT = (0.0, 0.5, _S60, 1.0)


def _snap(x: float) -> float:
    for v in _EXACT:
        if abs(abs(x) - v) < 1.0e-12:
            return math.copysign(v, x) if v else 0.0
    return x


class MixerGeometry:
    """Arm layout, spin pattern, and command-to-rpm gains."""

    __slots__ = ("arm_angles_deg", "spin", "k_roll", "k_pitch", "k_yaw",
                 "roll_weights", "pitch_weights")

    def __init__(self,
                 arm_angles_deg: tuple[float, ...] = (
                     0.0, 60.0, 120.0, 180.0, 240.0, 300.0),
                 spin: tuple[int, ...] = (1, -1, 1, -1, 1, -1),
                 k_roll: float = 1.0, k_pitch: float = 1.0,
                 k_yaw: float = 1.0):
        if len(arm_angles_deg) != len(spin):
            raise ValidationError("arm count and spin count differ",
                                  key="spin")
        if sum(spin) != 0:
            raise ValidationError("spin directions must cancel", key="spin")
        self.arm_angles_deg = tuple(arm_angles_deg)
        self.spin = tuple(spin)
        self.k_roll = k_roll
        self.k_pitch = k_pitch
        self.k_yaw = k_yaw
        self.roll_weights = tuple(
            _snap(math.sin(math.radians(a))) for a in self.arm_angles_deg)
        self.pitch_weights = tuple(
            _snap(math.cos(math.radians(a))) for a in self.arm_angles_deg)


_GRID = 1048576.0   # 2^20 steps per rpm


def _grid(x: float) -> float:
    return round(x * _GRID) / _GRID


def mix(throttle: float, roll_cmd: float, pitch_cmd: float, yaw_cmd: float,
        geometry: MixerGeometry | None = None) -> tuple[float, ...]:
    """Six rpm setpoints; the sum equals six times the throttle exactly.

    Roll weights are sin(arm angle), so the two motors on the roll axis
    never move with a roll command; pitch weights cos(arm angle) touch
    all six; yaw adds k_yaw per unit command along the spin pattern.

    Outputs sit on a 2^-20 rpm grid: throttle and the per-motor deltas
    are quantized so each sum is exact in float arithmetic and opposite
    arms cancel to the last bit.  A micro-rpm of quantization is four
    orders below the bus protocol's 1 rpm resolution.
    """
    g = geometry or MixerGeometry()
    if throttle < 0.0:
        raise ValidationError("throttle must be non-negative", key="throttle")
    t = _grid(throttle)
    return tuple(t + _grid(g.k_roll * roll_cmd * g.roll_weights[i]
                           + g.k_pitch * pitch_cmd * g.pitch_weights[i]
                           + g.k_yaw * yaw_cmd * g.spin[i])
                 for i in range(len(g.spin)))


def saturate(throttle: float, roll_cmd: float, pitch_cmd: float,
             yaw_cmd: float, omega_min: float, omega_max: float,
             geometry: MixerGeometry | None = None) -> tuple[float, ...]:
    """Mix, then bring setpoints inside [omega_min, omega_max].

    Authority is shed in priority order: the yaw term is scaled down
    first, then roll and pitch jointly, and only then is the remaining
    throttle-only command clipped.  Each stage re-mixes, so thrust keeps
    top priority throughout.
    """
    if not 0.0 <= omega_min < omega_max:
        raise ValidationError("need 0 <= omega_min < omega_max", key="limits")
    g = geometry or MixerGeometry()

    def inside(points: tuple[float, ...]) -> bool:
        return all(omega_min <= p <= omega_max for p in points)

    points = mix(throttle, roll_cmd, pitch_cmd, yaw_cmd, g)
    if inside(points):
        return points

    s_yaw = _shrink(lambda s: inside(
        mix(throttle, roll_cmd, pitch_cmd, yaw_cmd * s, g)))
    points = mix(throttle, roll_cmd, pitch_cmd, yaw_cmd * s_yaw, g)
    if inside(points):
        return points

    s_rp = _shrink(lambda s: inside(
        mix(throttle, roll_cmd * s, pitch_cmd * s, 0.0, g)))
    points = mix(throttle, roll_cmd * s_rp, pitch_cmd * s_rp, 0.0, g)
    if inside(points):
        return points
    return tuple(min(max(p, omega_min), omega_max) for p in points)


def _shrink(ok) -> float:
    """Largest scale in [0, 1] satisfying the feasibility predicate.

    The constraint is monotone in the scale, so bisection converges to
    float precision.
    """
    if ok(1.0):
        return 1.0
    if not ok(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
