"""Deterministic virtual testbed for agricultural-vehicle CAN security work.

Simulates two J1939/CAN segments joined by a wireless bridge, a small
fleet of ECUs (joystick, display, steering, hydraulics, engine, power,
implement lights), and the attacker's toolkit: radio taps, capture
logs, differential analysis, and mutate-and-replay injection.
"""

from .attack import (
    ChannelStrategy,
    DiffReport,
    FlaggedByte,
    InjectionStats,
    MessageMatch,
    Mutation,
    RadioInjector,
    RateChange,
    ReplaySchedule,
    WiredInjector,
    capture_frames,
    channel_occupancy,
    diff_captures,
    plan_replay,
    schedule_injection,
    sniff,
)
from .bus import BusConfig, BusStats, CanBus, NodeHandle, arbitrate
from .capture import CaptureLog, CaptureRecord, parse_record, serialize_record
from .errors import (
    AddressError,
    ArbitrationCollisionError,
    BaselineError,
    CaptureError,
    ConfigurationError,
    DecapsulationError,
    FrameError,
    FramingError,
    IdentifierError,
    IntegrityError,
    LengthError,
    MonotonicityError,
    ParseError,
    ScenarioValidationError,
    SignalError,
    SimulationError,
    StaveError,
    TimeReversalError,
)
from .fleet import (
    Fleet,
    JoystickScript,
    MessageCatalog,
    MessageSpec,
    ScriptEntry,
    VehicleObservables,
    steering_step,
    steering_target,
)
from .j1939 import (
    CanFrame,
    J1939Address,
    ScaledSignal,
    decode_id,
    encode_id,
    read_signal,
    write_signal,
)
from .radio import (
    BridgeEndpoint,
    RadioConfig,
    RadioMedium,
    RadioPacket,
    RadioStats,
    Tap,
    crc16_ccitt_false,
    decapsulate,
    encapsulate,
    hop_channel,
)
from .runner import SimulationResult, Testbed, build_testbed, run_scenario, summarize
from .scenario import Scenario, load_scenario, validate_scenario
from .sim import SimClock, seconds_from_us, us_from_seconds

__version__ = "0.1.0"

__all__ = [
    "AddressError",
    "ArbitrationCollisionError",
    "BaselineError",
    "BridgeEndpoint",
    "BusConfig",
    "BusStats",
    "CanBus",
    "CanFrame",
    "CaptureError",
    "CaptureLog",
    "CaptureRecord",
    "ChannelStrategy",
    "ConfigurationError",
    "DecapsulationError",
    "DiffReport",
    "FlaggedByte",
    "Fleet",
    "FrameError",
    "FramingError",
    "IdentifierError",
    "InjectionStats",
    "IntegrityError",
    "J1939Address",
    "JoystickScript",
    "LengthError",
    "MessageCatalog",
    "MessageMatch",
    "MessageSpec",
    "MonotonicityError",
    "Mutation",
    "NodeHandle",
    "ParseError",
    "RadioConfig",
    "RadioInjector",
    "RadioMedium",
    "RadioPacket",
    "RadioStats",
    "RateChange",
    "ReplaySchedule",
    "ScaledSignal",
    "Scenario",
    "ScenarioValidationError",
    "ScriptEntry",
    "SignalError",
    "SimClock",
    "SimulationError",
    "SimulationResult",
    "StaveError",
    "Tap",
    "Testbed",
    "TimeReversalError",
    "VehicleObservables",
    "WiredInjector",
    "arbitrate",
    "build_testbed",
    "capture_frames",
    "channel_occupancy",
    "crc16_ccitt_false",
    "decapsulate",
    "decode_id",
    "diff_captures",
    "encapsulate",
    "encode_id",
    "hop_channel",
    "load_scenario",
    "parse_record",
    "plan_replay",
    "read_signal",
    "run_scenario",
    "schedule_injection",
    "seconds_from_us",
    "serialize_record",
    "sniff",
    "steering_step",
    "steering_target",
    "summarize",
    "us_from_seconds",
    "validate_scenario",
    "write_signal",
]
