"""Wire formats for the motor-control bus and the attitude link.

Command frames travel master -> motor controller over the shared two-wire
bus; attitude frames travel from the sensor head to the flight controller
over a point-to-point serial link.  Both codecs are byte-exact: encode and
decode round-trip bit for bit, and every checksum failure is surfaced as an
error rather than a silently corrected value.

Command frame layout (on-wire order)::

    [address][command][length][payload ...][crc8]

The CRC covers address | command | payload (polynomial 0x07, init 0x00,
MSB first).  The length byte is validated structurally instead.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

from .errors import CrcError, MalformedLength, ValidationError

CMD_SET_SPEED = 0x01
CMD_GET_STATUS = 0x02
CMD_ARM = 0x03
CMD_DISARM = 0x04

# payload size each opcode requires
_PAYLOAD_SIZE = {
    CMD_SET_SPEED: 2,
    CMD_GET_STATUS: 0,
    CMD_ARM: 0,
    CMD_DISARM: 0,
}

_MAX_PAYLOAD = 4

CRC8_POLY = 0x07
CRC8_INIT = 0x00


def _build_crc_table(poly: int) -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _build_crc_table(CRC8_POLY)


def crc8(data: bytes, init: int = CRC8_INIT) -> int:
    """CRC-8 of ``data``, polynomial 0x07, MSB first, no reflection."""
    crc = init
    for b in data:
        crc = _CRC_TABLE[crc ^ b]
    return crc


@dataclass(frozen=True)
class CommandFrame:
    """One master->controller bus frame.

    address is 7-bit (1..6 address the six motor controllers); payload
    meaning depends on the command: SET_SPEED carries a uint16 rpm,
    little-endian, the rest carry nothing.
    """

    address: int
    command: int
    payload: bytes = b""

    def __post_init__(self):
        if not 1 <= self.address <= 0x7F:
            raise ValidationError("address must be a nonzero 7-bit value",
                                  key="address")
        if self.command not in _PAYLOAD_SIZE:
            raise ValidationError(f"unknown command {self.command:#04x}",
                                  key="command")
        want = _PAYLOAD_SIZE[self.command]
        if len(self.payload) != want:
            raise ValidationError(
                f"command {self.command:#04x} requires {want} payload bytes",
                key="payload")

    @classmethod
    def set_speed(cls, address: int, rpm: int) -> "CommandFrame":
        if not 0 <= rpm <= 0xFFFF:
            raise ValidationError("rpm must fit in uint16", key="rpm")
        return cls(address, CMD_SET_SPEED, struct.pack("<H", rpm))

    @property
    def rpm(self) -> int:
        if self.command != CMD_SET_SPEED:
            raise ValidationError("frame carries no speed", key="command")
        return struct.unpack("<H", self.payload)[0]


def encode_command(frame: CommandFrame) -> bytes:
    core = bytes([frame.address, frame.command]) + frame.payload
    return (bytes([frame.address, frame.command, len(frame.payload)])
            + frame.payload + bytes([crc8(core)]))


def decode_command(data: bytes) -> CommandFrame:
    """Decode a raw bus frame.

    Raises MalformedLength when the length byte disagrees with the buffer
    or the opcode, CrcError when the checksum fails.  A frame that decodes
    is exactly the frame that was encoded.
    """
    if len(data) < 4:
        raise MalformedLength(f"frame too short ({len(data)} bytes)")
    address, command, length = data[0], data[1], data[2]
    if length > _MAX_PAYLOAD:
        raise MalformedLength(f"payload length {length} exceeds {_MAX_PAYLOAD}")
    if len(data) != 4 + length:
        raise MalformedLength(
            f"length byte says {length}, buffer holds {len(data) - 4}")
    payload = data[3:3 + length]
    expected = crc8(bytes([address, command]) + payload)
    if data[-1] != expected:
        raise CrcError(f"crc {data[-1]:#04x} != {expected:#04x}")
    if command in _PAYLOAD_SIZE and length != _PAYLOAD_SIZE[command]:
        raise MalformedLength(
            f"command {command:#04x} requires {_PAYLOAD_SIZE[command]} bytes")
    # address/command legality re-checked by the constructor
    return CommandFrame(address, command, payload)


def encode_reply(address: int, command: int, payload: bytes) -> bytes:
    """Build a slave reply: same envelope as a command frame.

    The command byte echoes the request (0x00 when the request itself
    could not be decoded); the payload carries a status code or, for a
    status query, the four status bytes.
    """
    if not 0 < address < 128:
        raise ValidationError(f"address {address} outside 1..127",
                              key="address")
    if len(payload) > _MAX_PAYLOAD:
        raise ValidationError("reply payload exceeds 4 bytes", key="payload")
    core = bytes([address, command]) + payload
    return (bytes([address, command, len(payload)]) + payload
            + bytes([crc8(core)]))


def decode_reply(data: bytes) -> tuple[int, int, bytes]:
    """Decode a slave reply into (address, command, payload).

    Checks only the envelope: length consistency and CRC.  Replies carry
    status payloads whose size depends on the outcome, so no per-opcode
    size rule applies.
    """
    if len(data) < 4:
        raise MalformedLength(f"reply too short ({len(data)} bytes)")
    address, command, length = data[0], data[1], data[2]
    if length > _MAX_PAYLOAD:
        raise MalformedLength(f"payload length {length} exceeds {_MAX_PAYLOAD}")
    if len(data) != 4 + length:
        raise MalformedLength(
            f"length byte says {length}, buffer holds {len(data) - 4}")
    payload = data[3:3 + length]
    expected = crc8(bytes([address, command]) + payload)
    if data[-1] != expected:
        raise CrcError(f"crc {data[-1]:#04x} != {expected:#04x}")
    return address, command, payload


# --- attitude link ---

_IMU_PACK = struct.Struct("<ffffffH")  # angles deg x3, rates deg/s x3, sequence
IMU_FRAME_SIZE = _IMU_PACK.size + 1


def _wrap_angle(deg: float) -> float:
    """Wrap into (-180, 180]."""
    wrapped = math.fmod(deg + 180.0, 360.0)
    if wrapped <= 0.0:
        wrapped += 360.0
    return wrapped - 180.0


@dataclass(frozen=True)
class ImuFrame:
    """Fused attitude sample sent over the serial attitude link."""

    roll: float
    pitch: float
    yaw: float
    rates: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sequence: int = 0

    def __post_init__(self):
        for name in ("roll", "pitch", "yaw"):
            v = getattr(self, name)
            if not -180.0 < v <= 180.0:
                raise ValidationError("angle outside (-180, 180]", key=name)
        if not 0 <= self.sequence <= 0xFFFF:
            raise ValidationError("sequence must fit in uint16", key="sequence")

    def next_sequence(self) -> int:
        return (self.sequence + 1) & 0xFFFF


def encode_imu(frame: ImuFrame) -> bytes:
    body = _IMU_PACK.pack(frame.roll, frame.pitch, frame.yaw,
                          frame.rates[0], frame.rates[1], frame.rates[2],
                          frame.sequence)
    return body + bytes([sum(body) & 0xFF])


def decode_imu(data: bytes) -> ImuFrame:
    if len(data) != IMU_FRAME_SIZE:
        raise MalformedLength(
            f"attitude frame must be {IMU_FRAME_SIZE} bytes, got {len(data)}")
    body, checksum = data[:-1], data[-1]
    if sum(body) & 0xFF != checksum:
        raise CrcError("attitude frame checksum mismatch")
    roll, pitch, yaw, p, q, r, seq = _IMU_PACK.unpack(body)
    return ImuFrame(roll, pitch, yaw, (p, q, r), seq)


def wrap_angle(deg: float) -> float:
    """Public angle wrap used by producers of attitude frames."""
    return _wrap_angle(deg)
