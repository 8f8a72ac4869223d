"""Scenario documents: schema, typed form, and full validation.

A scenario is a versioned JSON document (schema "stave-scenario/1")
that reaches every knob of the simulation:

    {
      "schema": "stave-scenario/1",
      "seed": 42,
      "duration_s": 5.0,
      "bus": {"bitrate": 250000, "frame_overhead_bits": 67},
      "radio": {"num_channels": 16, "hopping": false, "hop_seed": 0,
                "loss_probability": 0.0, "latency_s": 0.002,
                "faraday_mode": false},
      "fleet": {"steer_enable": true, "engine_rpm": 800.0,
                "machine_voltage": 12.6,
                "catalog": {"JOY1": {"cycle_ms": 50}}},
      "joystick_script": [{"t_s": 0.0, "x": 25, "y": 125, "button": 0}],
      "taps": [{"name": "air", "channels": "all", "inside_faraday": true}],
      "attacks": [
        {"type": "sniff", "start_s": 0.0, "duration_s": 2.0, "save": "cap",
         "attachment": {"kind": "radio-tap", "tap": "air"}},
        {"type": "replay", "start_s": 2.01, "capture": "cap",
         "match": {"pgn": "0xFF10"}, "mutate": "byte0=reflect(250)",
         "timing": "preserve", "save": "sched"},
        {"type": "inject", "start_s": 2.01, "schedule": "sched",
         "repeat": true,
         "attachment": {"kind": "radio",
                        "strategy": {"mode": "fixed", "channel": 0},
                        "inside_faraday": true}}
      ],
      "outputs": {"summary": "summary.json",
                  "captures": {"vehicle0": "vehicle.log"},
                  "reports": {"sched": "schedule.json"}}
    }

Every section except schema, seed, and duration_s is optional and
defaults sensibly. Capture sources usable by attacks and outputs are
the built-in segment recorders ("vehicle0", "operator0"), declared tap
names, and earlier sniff saves. Validation checks structure and
cross-references and reports every problem at once, each message
prefixed with its field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .attack import ChannelStrategy, MessageMatch, Mutation, TIMING_FAST, TIMING_PRESERVE
from .bus import BusConfig
from .errors import ConfigurationError, ScenarioValidationError, StaveError
from .fleet import JoystickScript, MessageCatalog, ScriptEntry
from .radio import RadioConfig
from .sim import us_from_seconds

SCENARIO_SCHEMA = "stave-scenario/1"
SEGMENT_NAMES = ("operator0", "vehicle0")
ATTACK_TYPES = ("sniff", "diff", "replay", "inject", "occupancy")


@dataclass(frozen=True)
class TapSpec:
    name: str
    channels: tuple[int, ...] | None  # None: all-band
    inside_faraday: bool = True


@dataclass(frozen=True)
class SniffAttachment:
    kind: str  # wired-tap | radio-tap
    ref: str   # segment name or tap name


@dataclass(frozen=True)
class InjectAttachment:
    kind: str  # wired | radio
    segment: str | None = None
    strategy: ChannelStrategy | None = None
    inside_faraday: bool = True


@dataclass(frozen=True)
class SniffSpec:
    start_us: int
    duration_us: int
    attachment: SniffAttachment
    save: str


@dataclass(frozen=True)
class DiffSpec:
    start_us: int
    pre: str
    post: str
    save: str


@dataclass(frozen=True)
class OccupancySpec:
    start_us: int
    capture: str
    save: str


@dataclass(frozen=True)
class ReplaySpec:
    start_us: int
    capture: str
    match: MessageMatch
    mutation: Mutation | None
    timing: str
    save: str


@dataclass(frozen=True)
class InjectSpec:
    start_us: int
    schedule: str
    attachment: InjectAttachment
    repeat: bool = False


AttackSpec = SniffSpec | DiffSpec | OccupancySpec | ReplaySpec | InjectSpec


@dataclass(frozen=True)
class OutputSpec:
    summary: str | None = None
    captures: dict[str, str] = field(default_factory=dict)
    reports: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    seed: int
    duration_us: int
    bus: BusConfig
    radio: RadioConfig
    catalog: MessageCatalog
    steer_enable: bool
    engine_rpm: float
    machine_voltage: float
    script: JoystickScript
    taps: tuple[TapSpec, ...]
    attacks: tuple[AttackSpec, ...]
    outputs: OutputSpec

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)


class _Check:
    """Accumulates path-prefixed validation errors."""

    def __init__(self):
        self.errors: list[str] = []

    def add(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def expect_keys(self, path: str, doc: dict, allowed: set[str]) -> None:
        for key in sorted(set(doc) - allowed):
            self.add(f"{path}.{key}" if path else key, "unknown field")

    def number(self, path: str, value, *, lo=None, hi=None, default=None):
        if value is None:
            return default
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.add(path, f"expected a number, got {value!r}")
            return default
        if lo is not None and value < lo:
            self.add(path, f"must be >= {lo}, got {value!r}")
            return default
        if hi is not None and value > hi:
            self.add(path, f"must be <= {hi}, got {value!r}")
            return default
        return value

    def integer(self, path: str, value, *, lo=None, hi=None, default=None):
        if value is None:
            return default
        if isinstance(value, bool) or not isinstance(value, int):
            self.add(path, f"expected an integer, got {value!r}")
            return default
        return self.number(path, value, lo=lo, hi=hi, default=default)

    def boolean(self, path: str, value, *, default=None):
        if value is None:
            return default
        if not isinstance(value, bool):
            self.add(path, f"expected a boolean, got {value!r}")
            return default
        return value

    def string(self, path: str, value, *, default=None):
        if value is None:
            return default
        if not isinstance(value, str) or not value:
            self.add(path, f"expected a non-empty string, got {value!r}")
            return default
        return value


def _parse_int_field(check: _Check, path: str, value, *, lo: int, hi: int):
    """Accept an int or a 0x-prefixed hex string."""
    if isinstance(value, str):
        try:
            value = int(value, 0)
        except ValueError:
            check.add(path, f"not an integer: {value!r}")
            return None
    if isinstance(value, bool) or not isinstance(value, int):
        check.add(path, f"expected an integer or hex string, got {value!r}")
        return None
    if not lo <= value <= hi:
        check.add(path, f"0x{value:X} outside 0x{lo:X}..0x{hi:X}")
        return None
    return value


def _relative_path(check: _Check, path: str, value) -> str | None:
    text = check.string(path, value)
    if text is None:
        return None
    p = Path(text)
    if p.is_absolute() or ".." in p.parts:
        check.add(path, f"must be a relative path without '..', got {text!r}")
        return None
    return text


def _validate_taps(check: _Check, doc, num_channels: int) -> tuple[TapSpec, ...]:
    taps = []
    if doc is None:
        return ()
    if not isinstance(doc, list):
        check.add("taps", f"expected a list, got {type(doc).__name__}")
        return ()
    names = set()
    for i, item in enumerate(doc):
        path = f"taps[{i}]"
        if not isinstance(item, dict):
            check.add(path, "expected an object")
            continue
        check.expect_keys(path, item, {"name", "channels", "inside_faraday"})
        name = check.string(f"{path}.name", item.get("name"))
        if name in SEGMENT_NAMES:
            check.add(f"{path}.name", f"{name!r} shadows a built-in segment recorder")
            name = None
        if name is not None:
            if name in names:
                check.add(f"{path}.name", f"duplicate tap name {name!r}")
            names.add(name)
        channels = item.get("channels", "all")
        parsed: tuple[int, ...] | None
        if channels == "all":
            parsed = None
        elif isinstance(channels, list) and channels:
            parsed = []
            for j, c in enumerate(channels):
                c = _parse_int_field(check, f"{path}.channels[{j}]", c, lo=0, hi=num_channels - 1)
                if c is not None:
                    parsed.append(c)
            parsed = tuple(parsed)
        else:
            check.add(f"{path}.channels", f'expected "all" or a non-empty channel list, got {channels!r}')
            parsed = None
        inside = check.boolean(f"{path}.inside_faraday", item.get("inside_faraday"), default=True)
        if name is not None:
            taps.append(TapSpec(name=name, channels=parsed, inside_faraday=inside))
    return tuple(taps)


def _validate_sniff_attachment(check: _Check, path: str, doc, tap_names: set[str]) -> SniffAttachment | None:
    if not isinstance(doc, dict):
        check.add(path, "expected an attachment object")
        return None
    kind = doc.get("kind")
    if kind == "wired-tap":
        check.expect_keys(path, doc, {"kind", "segment"})
        segment = check.string(f"{path}.segment", doc.get("segment"))
        if segment is not None and segment not in SEGMENT_NAMES:
            check.add(f"{path}.segment", f"unknown segment {segment!r}; expected one of {SEGMENT_NAMES}")
            return None
        return SniffAttachment(kind="wired-tap", ref=segment) if segment else None
    if kind == "radio-tap":
        check.expect_keys(path, doc, {"kind", "tap"})
        tap = check.string(f"{path}.tap", doc.get("tap"))
        if tap is not None and tap not in tap_names:
            check.add(f"{path}.tap", f"tap {tap!r} is not declared in taps")
            return None
        return SniffAttachment(kind="radio-tap", ref=tap) if tap else None
    check.add(f"{path}.kind", f"expected wired-tap or radio-tap, got {kind!r}")
    return None


def _validate_inject_attachment(check: _Check, path: str, doc) -> InjectAttachment | None:
    if not isinstance(doc, dict):
        check.add(path, "expected an attachment object")
        return None
    kind = doc.get("kind")
    if kind == "wired":
        check.expect_keys(path, doc, {"kind", "segment"})
        segment = check.string(f"{path}.segment", doc.get("segment"))
        if segment is not None and segment not in SEGMENT_NAMES:
            check.add(f"{path}.segment", f"unknown segment {segment!r}; expected one of {SEGMENT_NAMES}")
            return None
        return InjectAttachment(kind="wired", segment=segment) if segment else None
    if kind == "radio":
        check.expect_keys(path, doc, {"kind", "strategy", "inside_faraday"})
        strategy_doc = doc.get("strategy", {"mode": "fixed", "channel": 0})
        strategy = None
        if not isinstance(strategy_doc, dict):
            check.add(f"{path}.strategy", "expected an object")
        else:
            check.expect_keys(f"{path}.strategy", strategy_doc, {"mode", "channel"})
            mode = strategy_doc.get("mode", "fixed")
            channel = strategy_doc.get("channel", 0)
            channel = _parse_int_field(check, f"{path}.strategy.channel", channel, lo=0, hi=255)
            try:
                strategy = ChannelStrategy(mode=mode, channel=channel if channel is not None else 0)
            except ConfigurationError as exc:
                check.add(f"{path}.strategy", str(exc))
        inside = check.boolean(f"{path}.inside_faraday", doc.get("inside_faraday"), default=True)
        if strategy is None:
            return None
        return InjectAttachment(kind="radio", strategy=strategy, inside_faraday=inside)
    check.add(f"{path}.kind", f"expected wired or radio, got {kind!r}")
    return None


def _validate_match(check: _Check, path: str, doc) -> MessageMatch | None:
    if not isinstance(doc, dict):
        check.add(path, "expected a match object")
        return None
    check.expect_keys(path, doc, {"can_id", "pgn"})
    can_id = doc.get("can_id")
    pgn = doc.get("pgn")
    if (can_id is None) == (pgn is None):
        check.add(path, "exactly one of can_id or pgn must be given")
        return None
    if can_id is not None:
        value = _parse_int_field(check, f"{path}.can_id", can_id, lo=0, hi=(1 << 29) - 1)
        return MessageMatch(can_id=value) if value is not None else None
    value = _parse_int_field(check, f"{path}.pgn", pgn, lo=0, hi=(1 << 18) - 1)
    return MessageMatch(pgn=value) if value is not None else None


def _validate_attacks(check: _Check, doc, duration_us: int, tap_names: set[str]):
    attacks: list[AttackSpec] = []
    # name -> time from which the named capture may be consumed
    capture_ready: dict[str, int] = {name: 0 for name in SEGMENT_NAMES}
    capture_ready.update({name: 0 for name in tap_names})
    schedule_ready: dict[str, int] = {}
    report_names: set[str] = set(SEGMENT_NAMES) | set(tap_names)
    if doc is None:
        return (), capture_ready, report_names
    if not isinstance(doc, list):
        check.add("attacks", f"expected a list, got {type(doc).__name__}")
        return (), capture_ready, report_names

    def fresh_save(path, name):
        if name is None:
            return None
        if name in capture_ready or name in schedule_ready or name in report_names:
            check.add(path, f"save name {name!r} is already taken")
            return None
        return name

    for i, item in enumerate(doc):
        path = f"attacks[{i}]"
        if not isinstance(item, dict):
            check.add(path, "expected an object")
            continue
        kind = item.get("type")
        if kind not in ATTACK_TYPES:
            check.add(f"{path}.type", f"unknown attack type {kind!r}; expected one of {ATTACK_TYPES}")
            continue
        start_s = check.number(f"{path}.start_s", item.get("start_s"), lo=0.0)
        if start_s is None:
            check.add(f"{path}.start_s", "required")
            continue
        start_us = us_from_seconds(start_s)
        if start_us >= duration_us:
            check.add(f"{path}.start_s", f"attack starts at {start_s} s, at or past the scenario duration")
            continue

        if kind == "sniff":
            check.expect_keys(path, item, {"type", "start_s", "duration_s", "attachment", "save"})
            duration_s = check.number(f"{path}.duration_s", item.get("duration_s"), lo=0.0)
            if duration_s is None:
                check.add(f"{path}.duration_s", "required")
                continue
            window_us = us_from_seconds(duration_s)
            if start_us + window_us > duration_us:
                check.add(f"{path}.duration_s", "sniff window runs past the scenario duration")
                continue
            attachment = _validate_sniff_attachment(check, f"{path}.attachment", item.get("attachment"), tap_names)
            save = fresh_save(f"{path}.save", check.string(f"{path}.save", item.get("save")))
            if attachment is None or save is None:
                continue
            capture_ready[save] = start_us + window_us
            attacks.append(SniffSpec(start_us=start_us, duration_us=window_us,
                                     attachment=attachment, save=save))
        elif kind == "diff":
            check.expect_keys(path, item, {"type", "start_s", "pre", "post", "save"})
            ok = True
            for role in ("pre", "post"):
                name = check.string(f"{path}.{role}", item.get(role))
                if name is None:
                    ok = False
                elif name not in capture_ready:
                    check.add(f"{path}.{role}", f"unknown capture {name!r}")
                    ok = False
                elif capture_ready[name] > start_us:
                    check.add(f"{path}.{role}", f"capture {name!r} is not complete until after this attack starts")
                    ok = False
            save = fresh_save(f"{path}.save", check.string(f"{path}.save", item.get("save")))
            if not ok or save is None:
                continue
            report_names.add(save)
            attacks.append(DiffSpec(start_us=start_us, pre=item["pre"], post=item["post"], save=save))
        elif kind == "occupancy":
            check.expect_keys(path, item, {"type", "start_s", "capture", "save"})
            name = check.string(f"{path}.capture", item.get("capture"))
            if name is not None and name not in capture_ready:
                check.add(f"{path}.capture", f"unknown capture {name!r}")
                name = None
            save = fresh_save(f"{path}.save", check.string(f"{path}.save", item.get("save")))
            if name is None or save is None:
                continue
            report_names.add(save)
            attacks.append(OccupancySpec(start_us=start_us, capture=name, save=save))
        elif kind == "replay":
            check.expect_keys(path, item, {"type", "start_s", "capture", "match", "mutate", "timing", "save"})
            name = check.string(f"{path}.capture", item.get("capture"))
            if name is not None:
                if name not in capture_ready:
                    check.add(f"{path}.capture", f"unknown capture {name!r}")
                    name = None
                elif capture_ready[name] > start_us:
                    check.add(f"{path}.capture", f"capture {name!r} is not complete until after this attack starts")
                    name = None
            match = _validate_match(check, f"{path}.match", item.get("match"))
            mutation = None
            if item.get("mutate") is not None:
                text = check.string(f"{path}.mutate", item.get("mutate"))
                if text is not None:
                    try:
                        mutation = Mutation.parse(text)
                    except ConfigurationError as exc:
                        check.add(f"{path}.mutate", str(exc))
            timing = item.get("timing", TIMING_PRESERVE)
            if timing not in (TIMING_PRESERVE, TIMING_FAST):
                check.add(f"{path}.timing", f"expected preserve or fast, got {timing!r}")
                timing = TIMING_PRESERVE
            save = fresh_save(f"{path}.save", check.string(f"{path}.save", item.get("save")))
            if name is None or match is None or save is None:
                continue
            schedule_ready[save] = start_us
            report_names.add(save)
            attacks.append(ReplaySpec(start_us=start_us, capture=name, match=match,
                                      mutation=mutation, timing=timing, save=save))
        else:  # inject
            check.expect_keys(path, item, {"type", "start_s", "schedule", "attachment", "repeat"})
            name = check.string(f"{path}.schedule", item.get("schedule"))
            if name is not None:
                if name not in schedule_ready:
                    check.add(f"{path}.schedule", f"unknown replay schedule {name!r}")
                    name = None
                elif schedule_ready[name] > start_us:
                    check.add(f"{path}.schedule", f"schedule {name!r} is planned after this attack starts")
                    name = None
            attachment = _validate_inject_attachment(check, f"{path}.attachment", item.get("attachment"))
            repeat = check.boolean(f"{path}.repeat", item.get("repeat"), default=False)
            if name is None or attachment is None:
                continue
            attacks.append(InjectSpec(start_us=start_us, schedule=name,
                                      attachment=attachment, repeat=repeat))
    return tuple(attacks), capture_ready, report_names


def validate_scenario(doc: dict) -> Scenario:
    """Check a scenario document completely; raise with every error found."""
    check = _Check()
    if not isinstance(doc, dict):
        raise ScenarioValidationError(["scenario: expected a JSON object"])
    check.expect_keys("", doc, {
        "schema", "seed", "duration_s", "bus", "radio", "fleet",
        "joystick_script", "taps", "attacks", "outputs",
    })
    if doc.get("schema") != SCENARIO_SCHEMA:
        check.add("schema", f"expected {SCENARIO_SCHEMA!r}, got {doc.get('schema')!r}")
    seed = check.integer("seed", doc.get("seed"), lo=0)
    if seed is None and "seed" not in doc:
        check.add("seed", "required")
    duration_s = check.number("duration_s", doc.get("duration_s"), lo=1e-6)
    if duration_s is None and "duration_s" not in doc:
        check.add("duration_s", "required")
    duration_us = us_from_seconds(duration_s) if duration_s else 1

    bus_doc = doc.get("bus") or {}
    bus = BusConfig()
    if not isinstance(bus_doc, dict):
        check.add("bus", "expected an object")
    else:
        check.expect_keys("bus", bus_doc, {"bitrate", "frame_overhead_bits"})
        try:
            bus = BusConfig(
                bitrate=check.integer("bus.bitrate", bus_doc.get("bitrate"), lo=1, default=250_000),
                frame_overhead_bits=check.integer(
                    "bus.frame_overhead_bits", bus_doc.get("frame_overhead_bits"), lo=1, default=67),
            )
        except ConfigurationError as exc:
            check.add("bus", str(exc))

    radio_doc = doc.get("radio") or {}
    radio = RadioConfig()
    if not isinstance(radio_doc, dict):
        check.add("radio", "expected an object")
    else:
        check.expect_keys("radio", radio_doc, {
            "num_channels", "hopping", "hop_seed", "loss_probability", "latency_s", "faraday_mode",
        })
        latency_s = check.number("radio.latency_s", radio_doc.get("latency_s"), lo=0.0, default=0.002)
        try:
            radio = RadioConfig(
                num_channels=check.integer("radio.num_channels", radio_doc.get("num_channels"),
                                           lo=1, hi=256, default=16),
                hopping=check.boolean("radio.hopping", radio_doc.get("hopping"), default=False),
                hop_seed=check.integer("radio.hop_seed", radio_doc.get("hop_seed"), lo=0, default=0),
                loss_probability=check.number("radio.loss_probability",
                                              radio_doc.get("loss_probability"),
                                              lo=0.0, hi=1.0, default=0.0),
                latency_us=us_from_seconds(latency_s if latency_s is not None else 0.002),
                faraday_mode=check.boolean("radio.faraday_mode", radio_doc.get("faraday_mode"),
                                           default=False),
            )
        except ConfigurationError as exc:
            check.add("radio", str(exc))

    fleet_doc = doc.get("fleet") or {}
    catalog = MessageCatalog.default()
    steer_enable = False
    engine_rpm = 800.0
    machine_voltage = 12.6
    if not isinstance(fleet_doc, dict):
        check.add("fleet", "expected an object")
    else:
        check.expect_keys("fleet", fleet_doc, {"steer_enable", "engine_rpm", "machine_voltage", "catalog"})
        steer_enable = check.boolean("fleet.steer_enable", fleet_doc.get("steer_enable"), default=False)
        engine_rpm = check.number("fleet.engine_rpm", fleet_doc.get("engine_rpm"),
                                  lo=0.0, hi=8031.875, default=800.0)
        machine_voltage = check.number("fleet.machine_voltage", fleet_doc.get("machine_voltage"),
                                       lo=0.0, hi=3276.75, default=12.6)
        overrides = fleet_doc.get("catalog")
        if overrides is not None:
            if not isinstance(overrides, dict) or not all(isinstance(v, dict) for v in overrides.values()):
                check.add("fleet.catalog", "expected an object of per-message field objects")
            else:
                try:
                    catalog = catalog.with_overrides(overrides)
                except (ConfigurationError, StaveError) as exc:
                    check.add("fleet.catalog", str(exc))

    script = JoystickScript()
    script_doc = doc.get("joystick_script")
    if script_doc is not None:
        if not isinstance(script_doc, list):
            check.add("joystick_script", "expected a list")
        else:
            entries = []
            bad = False
            for i, item in enumerate(script_doc):
                path = f"joystick_script[{i}]"
                if not isinstance(item, dict):
                    check.add(path, "expected an object")
                    bad = True
                    continue
                check.expect_keys(path, item, {"t_s", "x", "y", "button"})
                t_s = check.number(f"{path}.t_s", item.get("t_s"), lo=0.0)
                if t_s is None:
                    check.add(f"{path}.t_s", "required")
                    bad = True
                    continue
                entries.append(ScriptEntry(
                    t_us=us_from_seconds(t_s),
                    x=item.get("x", 125),
                    y=item.get("y", 125),
                    button=item.get("button", 0),
                ))
            if not bad:
                try:
                    script = JoystickScript(tuple(entries))
                except ScenarioValidationError as exc:
                    check.errors.extend(exc.errors)

    taps = _validate_taps(check, doc.get("taps"), radio.num_channels)
    tap_names = {t.name for t in taps}

    attacks, capture_ready, report_names = _validate_attacks(
        check, doc.get("attacks"), duration_us, tap_names)

    outputs = OutputSpec()
    outputs_doc = doc.get("outputs")
    if outputs_doc is not None:
        if not isinstance(outputs_doc, dict):
            check.add("outputs", "expected an object")
        else:
            check.expect_keys("outputs", outputs_doc, {"summary", "captures", "reports"})
            summary = None
            if outputs_doc.get("summary") is not None:
                summary = _relative_path(check, "outputs.summary", outputs_doc["summary"])
            captures = {}
            for name, rel in (outputs_doc.get("captures") or {}).items():
                if name not in capture_ready:
                    check.add(f"outputs.captures.{name}", f"unknown capture {name!r}")
                    continue
                rel = _relative_path(check, f"outputs.captures.{name}", rel)
                if rel is not None:
                    captures[name] = rel
            reports = {}
            for name, rel in (outputs_doc.get("reports") or {}).items():
                if name not in report_names or name in capture_ready:
                    check.add(f"outputs.reports.{name}", f"unknown report {name!r}")
                    continue
                rel = _relative_path(check, f"outputs.reports.{name}", rel)
                if rel is not None:
                    reports[name] = rel
            paths = [p for p in [summary, *captures.values(), *reports.values()] if p]
            if len(paths) != len(set(paths)):
                check.add("outputs", "two outputs share the same path")
            outputs = OutputSpec(summary=summary, captures=captures, reports=reports)

    if check.errors:
        raise ScenarioValidationError(check.errors)
    return Scenario(
        seed=seed,
        duration_us=duration_us,
        bus=bus,
        radio=radio,
        catalog=catalog,
        steer_enable=steer_enable,
        engine_rpm=engine_rpm,
        machine_voltage=machine_voltage,
        script=script,
        taps=taps,
        attacks=attacks,
        outputs=outputs,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError([f"{path}: not valid JSON: {exc}"]) from exc
    return validate_scenario(doc)
