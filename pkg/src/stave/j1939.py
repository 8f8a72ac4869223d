"""CAN 2.0B frames, 29-bit identifier codec, and scaled payload signals.

The 29-bit extended identifier is laid out as:

    bit 28..26   priority (3 bits)
    bit 25       extended data page (edp)
    bit 24       data page (dp)
    bit 23..16   PDU format (pf)
    bit 15..8    PDU specific (ps)
    bit 7..0     source address (sa)

The parameter group number combines edp, dp, pf and, for broadcast
(PDU2, pf >= 240) formats only, ps:

    pgn = edp * 2**17 + dp * 2**16 + pf * 2**8 + (ps if pf >= 240 else 0)

PDU1 formats (pf < 240) are destination-addressed: ps carries the
destination address and is excluded from the pgn.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import AddressError, FrameError, IdentifierError, SignalError

MAX_CAN_ID = (1 << 29) - 1
PDU2_THRESHOLD = 240


@dataclass(frozen=True)
class CanFrame:
    """One CAN data frame with an extended identifier.

    ``data`` carries the payload; the dlc is always ``len(data)`` so the
    two can never disagree. ``timestamp_us`` is simulation time in
    integer microseconds.
    """

    can_id: int
    data: bytes
    timestamp_us: int = 0

    def __post_init__(self):
        if not isinstance(self.can_id, int) or not 0 <= self.can_id <= MAX_CAN_ID:
            raise FrameError(f"can_id {self.can_id!r} outside 29-bit range")
        object.__setattr__(self, "data", bytes(self.data))
        if len(self.data) > 8:
            raise FrameError(f"payload of {len(self.data)} bytes exceeds dlc 8")
        if not isinstance(self.timestamp_us, int) or self.timestamp_us < 0:
            raise FrameError(f"timestamp_us {self.timestamp_us!r} must be a non-negative int")

    @property
    def dlc(self) -> int:
        return len(self.data)

    def at(self, timestamp_us: int) -> "CanFrame":
        """Copy of this frame carrying a different timestamp."""
        return replace(self, timestamp_us=timestamp_us)


@dataclass(frozen=True)
class J1939Address:
    """Decomposed form of a 29-bit identifier.

    ``destination_address`` is derived: the ps byte for PDU1 formats,
    ``None`` (broadcast) for PDU2.
    """

    priority: int
    pdu_format: int
    pdu_specific: int
    source_address: int
    edp: int = 0
    dp: int = 0

    def __post_init__(self):
        checks = (
            ("priority", self.priority, 7),
            ("pdu_format", self.pdu_format, 255),
            ("pdu_specific", self.pdu_specific, 255),
            ("source_address", self.source_address, 255),
            ("edp", self.edp, 1),
            ("dp", self.dp, 1),
        )
        for name, value, hi in checks:
            if not isinstance(value, int) or not 0 <= value <= hi:
                raise AddressError(f"{name} {value!r} outside 0..{hi}")

    @property
    def pgn(self) -> int:
        pgn = (self.edp << 17) | (self.dp << 16) | (self.pdu_format << 8)
        if self.pdu_format >= PDU2_THRESHOLD:
            pgn |= self.pdu_specific
        return pgn

    @property
    def destination_address(self) -> int | None:
        if self.pdu_format < PDU2_THRESHOLD:
            return self.pdu_specific
        return None

    @property
    def is_broadcast(self) -> bool:
        return self.pdu_format >= PDU2_THRESHOLD

    @classmethod
    def from_pgn(
        cls,
        pgn: int,
        source_address: int,
        priority: int = 6,
        destination: int | None = None,
    ) -> "J1939Address":
        """Build an address from a pgn, applying the PDU1/PDU2 rules.

        A destination must be supplied exactly when the pgn names a PDU1
        (destination-addressed) format.
        """
        if not isinstance(pgn, int) or not 0 <= pgn < (1 << 18):
            raise AddressError(f"pgn {pgn!r} outside 18-bit range")
        edp = (pgn >> 17) & 1
        dp = (pgn >> 16) & 1
        pf = (pgn >> 8) & 0xFF
        group_ext = pgn & 0xFF
        if pf < PDU2_THRESHOLD:
            if group_ext:
                raise AddressError(f"PDU1 pgn 0x{pgn:05X} must have a zero low byte")
            if destination is None:
                raise AddressError(f"pgn 0x{pgn:05X} is destination-addressed; destination required")
            if not isinstance(destination, int) or not 0 <= destination <= 255:
                raise AddressError(f"destination {destination!r} outside 0..255")
            ps = destination
        else:
            if destination is not None:
                raise AddressError(f"pgn 0x{pgn:05X} is broadcast; destination must not be supplied")
            ps = group_ext
        return cls(
            priority=priority,
            pdu_format=pf,
            pdu_specific=ps,
            source_address=source_address,
            edp=edp,
            dp=dp,
        )


def decode_id(can_id: int) -> J1939Address:
    """Slice a 29-bit identifier into its address fields."""
    if not isinstance(can_id, int) or not 0 <= can_id <= MAX_CAN_ID:
        raise IdentifierError(f"identifier {can_id!r} outside 29-bit range")
    return J1939Address(
        priority=(can_id >> 26) & 0x7,
        edp=(can_id >> 25) & 0x1,
        dp=(can_id >> 24) & 0x1,
        pdu_format=(can_id >> 16) & 0xFF,
        pdu_specific=(can_id >> 8) & 0xFF,
        source_address=can_id & 0xFF,
    )


def encode_id(address: J1939Address) -> int:
    """Pack address fields back into a 29-bit identifier."""
    return (
        (address.priority << 26)
        | (address.edp << 25)
        | (address.dp << 24)
        | (address.pdu_format << 16)
        | (address.pdu_specific << 8)
        | address.source_address
    )


@dataclass(frozen=True)
class ScaledSignal:
    """A little-endian scaled integer field inside a CAN payload.

    value = raw * scale + offset. Width is 1 or 2 bytes. Unsigned
    signals reserve a not-available raw sentinel (0xFF / 0xFFFF by
    default); signed signals disable it by default because the all-ones
    pattern is a legitimate negative sample.
    """

    byte_offset: int
    width_bytes: int
    scale: float
    offset: float = 0.0
    signed: bool = False
    not_available_raw: int | None = None

    def __post_init__(self):
        if self.width_bytes not in (1, 2):
            raise SignalError(f"width_bytes {self.width_bytes!r} must be 1 or 2")
        if not isinstance(self.byte_offset, int) or self.byte_offset < 0:
            raise SignalError(f"byte_offset {self.byte_offset!r} must be a non-negative int")
        if self.byte_offset + self.width_bytes > 8:
            raise SignalError("signal extends past byte 7")
        if not self.scale > 0:
            raise SignalError(f"scale {self.scale!r} must be positive")
        if self.not_available_raw is None and not self.signed:
            object.__setattr__(self, "not_available_raw", 0xFF if self.width_bytes == 1 else 0xFFFF)

    @property
    def raw_bounds(self) -> tuple[int, int]:
        bits = 8 * self.width_bytes
        if self.signed:
            return -(1 << (bits - 1)), (1 << (bits - 1)) - 1
        return 0, (1 << bits) - 1


def read_signal(frame: CanFrame, signal: ScaledSignal) -> float | None:
    """Decode a signal from a frame; None when the raw value is the
    not-available sentinel."""
    end = signal.byte_offset + signal.width_bytes
    if end > frame.dlc:
        raise SignalError(
            f"signal bytes {signal.byte_offset}..{end - 1} outside dlc {frame.dlc}"
        )
    raw = int.from_bytes(frame.data[signal.byte_offset:end], "little")
    if signal.not_available_raw is not None and raw == signal.not_available_raw:
        return None
    if signal.signed:
        bits = 8 * signal.width_bytes
        if raw >= 1 << (bits - 1):
            raw -= 1 << bits
    return raw * signal.scale + signal.offset


def write_signal(frame: CanFrame, signal: ScaledSignal, value: float) -> CanFrame:
    """Encode a physical value into a copy of the frame.

    The raw value is the nearest integer of (value - offset) / scale, so
    a read-back differs from ``value`` by at most scale/2.
    """
    end = signal.byte_offset + signal.width_bytes
    if end > frame.dlc:
        raise SignalError(
            f"signal bytes {signal.byte_offset}..{end - 1} outside dlc {frame.dlc}"
        )
    raw = round((value - signal.offset) / signal.scale)
    lo, hi = signal.raw_bounds
    if not lo <= raw <= hi:
        raise SignalError(f"value {value!r} maps to raw {raw}, outside {lo}..{hi}")
    if signal.not_available_raw is not None and raw == signal.not_available_raw:
        raise SignalError(
            f"value {value!r} maps to raw {raw}, the not-available sentinel"
        )
    mask = (1 << (8 * signal.width_bytes)) - 1
    data = bytearray(frame.data)
    data[signal.byte_offset:end] = (raw & mask).to_bytes(signal.width_bytes, "little")
    return replace(frame, data=bytes(data))
