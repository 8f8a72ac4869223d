"""Sniffing, differential analysis, mutation, replay, and injection."""

import random
from collections import Counter

import pytest

from stave import (
    BaselineError,
    BusConfig,
    CanBus,
    CanFrame,
    CaptureLog,
    CaptureRecord,
    ChannelStrategy,
    ConfigurationError,
    MessageMatch,
    Mutation,
    RadioConfig,
    RadioInjector,
    RadioMedium,
    ReplaySchedule,
    SimClock,
    WiredInjector,
    capture_frames,
    channel_occupancy,
    diff_captures,
    encapsulate,
    hop_channel,
    plan_replay,
    schedule_injection,
    sniff,
)
from stave.capture import KIND_CAN, KIND_RADIO


def can_log(entries: list[tuple[int, int, bytes]]) -> CaptureLog:
    """Build a capture from (timestamp_us, can_id, data) rows."""
    log = CaptureLog()
    for ts, can_id, data in entries:
        log.append(CaptureRecord(timestamp_us=ts, interface="vehicle0",
                                 kind=KIND_CAN, data=data, can_id=can_id))
    return log


JOY = 0x0CFF1028
STR = 0x18FF1213


def test_capture_frames_mixes_wired_and_radio() -> None:
    frame = CanFrame(JOY, b"\x19\x7d\x00\xff\xff\xff\xff\xff")
    log = CaptureLog()
    log.append(CaptureRecord(timestamp_us=10, interface="v", kind=KIND_CAN,
                             data=frame.data, can_id=JOY))
    log.append(CaptureRecord(timestamp_us=20, interface="air", kind=KIND_RADIO,
                             data=encapsulate(frame, 0, 1).to_bytes()))
    log.append(CaptureRecord(timestamp_us=30, interface="air", kind=KIND_RADIO,
                             data=b"\xde\xad\xbe\xef"))  # garbage is skipped
    frames = capture_frames(log)
    assert [(ts, f.can_id) for ts, f in frames] == [(10, JOY), (20, JOY)]


def test_sniff_is_half_open_window() -> None:
    log = can_log([(t, JOY, b"\x00") for t in (100, 200, 300)])
    got = sniff(log, 100, 200)  # [100, 300)
    assert [r.timestamp_us for r in got] == [100, 200]


def test_channel_occupancy_matches_counter() -> None:
    rng = random.Random(6)
    log = CaptureLog()
    counts: Counter[int] = Counter()
    frame = CanFrame(JOY, b"\x01")
    for seq in range(400):
        channel = rng.randrange(16)
        counts[channel] += 1
        log.append(CaptureRecord(timestamp_us=seq, interface="air",
                                 kind=KIND_RADIO,
                                 data=encapsulate(frame, channel, seq).to_bytes()))
    got = channel_occupancy(log)
    assert dict(got) == dict(counts)
    # sorted by descending count, channel number breaking ties
    assert got == sorted(got, key=lambda cn: (-cn[1], cn[0]))


def test_occupancy_ignores_wired_records() -> None:
    log = can_log([(0, JOY, b"\x00")])
    assert channel_occupancy(log) == []


# Differential analysis


def test_diff_flags_only_constant_to_changing_bytes() -> None:
    pre = can_log([(t, JOY, bytes((125, 125, 0))) for t in range(0, 1000, 100)])
    post = can_log([
        (t, JOY, bytes((x, 125, 0)))
        for t, x in zip(range(0, 1000, 100), [25, 25, 225, 225, 90, 90, 25, 225, 90, 25])
    ])
    report = diff_captures(pre, post)
    assert set(report.flagged) == {JOY}
    (entry,) = report.flagged[JOY]
    assert entry.offset == 0
    assert entry.pre_constant == 125
    assert entry.post_distinct == 3
    assert (entry.post_min, entry.post_max) == (25, 225)


def test_diff_requires_two_distinct_post_values() -> None:
    pre = can_log([(t, JOY, bytes((125,))) for t in range(0, 500, 100)])
    post = can_log([(t, JOY, bytes((25,))) for t in range(0, 500, 100)])
    # one constant replaced by another constant is not a moving byte
    assert diff_captures(pre, post).flagged == {}


def test_diff_ignores_bytes_that_vary_in_baseline() -> None:
    pre = can_log([(t, JOY, bytes((125 + (t // 100) % 2,))) for t in range(0, 500, 100)])
    post = can_log([(t, JOY, bytes((t % 7,))) for t in range(0, 500, 100)])
    assert diff_captures(pre, post).flagged == {}


def test_diff_reports_ids_unique_to_each_side() -> None:
    pre = can_log([(0, JOY, b"\x01"), (100, 0x111, b"\x02")])
    post = can_log([(0, JOY, b"\x01"), (100, 0x222, b"\x02")])
    report = diff_captures(pre, post)
    assert report.ids_only_in_pre == (0x111,)
    assert report.ids_only_in_post == (0x222,)


def test_diff_rate_change_ratio() -> None:
    # same id at 10 Hz in pre, 2 Hz in post over equal 1 s spans
    pre = can_log([(t, STR, b"\x00\x00") for t in range(0, 1_000_001, 100_000)])
    post = can_log([(t, STR, b"\x00\x00") for t in range(0, 1_000_001, 500_000)])
    report = diff_captures(pre, post)
    (rate,) = report.rate_changes
    assert rate.can_id == STR
    assert rate.pre_hz == pytest.approx(11 / 1.0)
    assert rate.post_hz == pytest.approx(3 / 1.0)


def test_diff_rate_within_ratio_not_flagged() -> None:
    pre = can_log([(t, STR, b"\x00") for t in range(0, 1_000_001, 100_000)])
    post = can_log([(t, STR, b"\x00") for t in range(0, 1_000_001, 125_000)])
    assert diff_captures(pre, post).rate_changes == ()


def test_diff_empty_baseline_is_an_error() -> None:
    post = can_log([(0, JOY, b"\x01")])
    with pytest.raises(BaselineError):
        diff_captures(CaptureLog(), post)


def test_diff_json_shape() -> None:
    pre = can_log([(t, JOY, bytes((125,))) for t in range(0, 300, 100)])
    post = can_log([(t, JOY, bytes((v,))) for t, v in ((0, 1), (100, 2), (200, 3))])
    doc = diff_captures(pre, post).to_json_dict()
    assert doc["schema"] == "stave-diff/1"
    assert doc["flagged"][0]["can_id"] == "0x0CFF1028"
    assert doc["flagged"][0]["bytes"][0]["offset"] == 0


# Mutations


@pytest.mark.parametrize("text,data,expected", [
    ("byte0=reflect(250)", bytes((25, 7)), bytes((225, 7))),
    ("byte1=const(0x2A)", bytes((1, 2, 3)), bytes((1, 42, 3))),
    ("byte2=add(10)", bytes((0, 0, 250)), bytes((0, 0, 4))),  # wraps mod 256
    ("byte0=add(-1)", bytes((0,)), bytes((255,))),
])
def test_mutation_apply(text: str, data: bytes, expected: bytes) -> None:
    assert Mutation.parse(text).apply(data) == expected


def test_mutation_reflect_is_involutive() -> None:
    mutation = Mutation.parse("byte0=reflect(250)")
    rng = random.Random(12)
    for _ in range(500):
        data = bytes([rng.randint(0, 250)]) + rng.randbytes(7)
        assert mutation.apply(mutation.apply(data)) == data


def test_mutation_touches_only_its_byte() -> None:
    mutation = Mutation.parse("byte3=const(0)")
    data = bytes(range(8))
    mutated = mutation.apply(data)
    assert mutated[3] == 0
    assert mutated[:3] == data[:3] and mutated[4:] == data[4:]


@pytest.mark.parametrize("text", [
    "byte0=reflect", "byte=reflect(1)", "byte0=smash(1)", "byte0=const(0x)",
    "byte8=const(1)", "byte0=const(256)", "bytes0=add(1)", "",
])
def test_mutation_parse_rejects(text: str) -> None:
    with pytest.raises(ConfigurationError):
        Mutation.parse(text)


def test_mutation_reflect_range_guard() -> None:
    mutation = Mutation.parse("byte0=reflect(250)")
    with pytest.raises(ConfigurationError):
        mutation.apply(bytes((251,)))


def test_mutation_offset_beyond_payload() -> None:
    mutation = Mutation.parse("byte5=add(1)")
    with pytest.raises(ConfigurationError):
        mutation.apply(bytes((1, 2)))


def test_mutation_spec_text_roundtrip() -> None:
    for text in ("byte0=reflect(250)", "byte7=const(66)", "byte2=add(-3)"):
        assert Mutation.parse(Mutation.parse(text).spec_text()).spec_text() == text


# Replay planning


def test_plan_replay_preserve_keeps_gaps() -> None:
    log = can_log([
        (1_000, JOY, bytes((25,))),
        (1_050, STR, b"\x00\x00"),
        (51_000, JOY, bytes((30,))),
        (151_000, JOY, bytes((35,))),
    ])
    schedule = plan_replay(log, MessageMatch(pgn=0xFF10), Mutation.parse("byte0=reflect(250)"))
    assert [delay for delay, _ in schedule.entries] == [0, 50_000, 150_000]
    assert [f.data[0] for _, f in schedule.entries] == [225, 220, 215]
    assert schedule.span_us == 150_000


def test_plan_replay_fast_collapses_delays() -> None:
    log = can_log([(1_000, JOY, b"\x01"), (90_000, JOY, b"\x02")])
    schedule = plan_replay(log, MessageMatch(can_id=JOY), None, "fast")
    assert [delay for delay, _ in schedule.entries] == [0, 0]


def test_plan_replay_empty_match_warns(caplog) -> None:
    log = can_log([(0, STR, b"\x00\x00")])
    with caplog.at_level("WARNING"):
        schedule = plan_replay(log, MessageMatch(pgn=0xFF10), None)
    assert len(schedule) == 0
    assert any("matched no frames" in r.message for r in caplog.records)


def test_plan_replay_rejects_bad_timing() -> None:
    with pytest.raises(ConfigurationError):
        plan_replay(CaptureLog(), MessageMatch(pgn=1), None, "warp")


def test_message_match_needs_exactly_one_selector() -> None:
    with pytest.raises(ConfigurationError):
        MessageMatch()
    with pytest.raises(ConfigurationError):
        MessageMatch(can_id=1, pgn=1)


def test_match_by_pgn_spans_source_addresses() -> None:
    match = MessageMatch(pgn=0xFF10)
    assert match.matches(CanFrame(0x0CFF1028, b""))
    assert match.matches(CanFrame(0x18FF10FE, b""))  # other sender, same group
    assert not match.matches(CanFrame(0x18FF1130, b""))


def test_replay_schedule_json_roundtrip() -> None:
    schedule = ReplaySchedule(entries=(
        (0, CanFrame(JOY, bytes((225, 125, 0)))),
        (50_000, CanFrame(JOY, bytes((226, 125, 0)))),
    ))
    doc = schedule.to_json_dict()
    assert doc["schema"] == "stave-replay/1"
    back = ReplaySchedule.from_json_dict(doc)
    assert back.entries == schedule.entries
    assert back.timing_mode == schedule.timing_mode
    with pytest.raises(ConfigurationError):
        ReplaySchedule.from_json_dict({"schema": "something-else"})


# Injection


def test_wired_injector_submits_to_bus() -> None:
    clock = SimClock()
    bus = CanBus(clock, "vehicle0", BusConfig())
    got: list[CanFrame] = []
    bus.attach("sink", on_frame=got.append)
    injector = WiredInjector(bus)
    injector.send_frame(CanFrame(JOY, bytes((225,))))
    clock.run_until(10_000)
    assert [f.can_id for f in got] == [JOY]
    assert injector.stats.sent == 1
    assert injector.stats.delivered == 1


def _radio_rig(config: RadioConfig):
    clock = SimClock()
    bus = CanBus(clock, "vehicle0", BusConfig())
    medium = RadioMedium(clock, config, rng=random.Random(0))
    medium.create_endpoint(bus, "bridge")
    got: list[CanFrame] = []
    bus.attach("sink", on_frame=got.append)
    return clock, medium, got


def test_radio_injector_fixed_channel_under_hopping() -> None:
    config = RadioConfig(num_channels=16, hopping=True, hop_seed=3)
    clock, medium, got = _radio_rig(config)
    injector = RadioInjector(medium, ChannelStrategy(mode="fixed", channel=0))
    n = 800
    for _ in range(n):
        injector.send_frame(CanFrame(JOY, bytes((225,))))
    clock.run_until(10_000_000)
    # the endpoint only accepts when its hop sequence lands on channel 0
    expected = sum(1 for seq in range(n) if hop_channel(config, seq) == 0)
    assert injector.stats.sent == n
    assert injector.stats.delivered == expected
    assert len(got) == expected


def test_radio_injector_follow_hops_delivers_everything() -> None:
    config = RadioConfig(num_channels=16, hopping=True, hop_seed=3)
    clock, medium, got = _radio_rig(config)
    injector = RadioInjector(medium, ChannelStrategy(mode="follow_hops"))
    for _ in range(300):
        injector.send_frame(CanFrame(JOY, bytes((225,))))
    clock.run_until(10_000_000)
    assert injector.stats.delivered == 300
    assert len(got) == 300


def test_channel_strategy_validation() -> None:
    with pytest.raises(ConfigurationError):
        ChannelStrategy(mode="psychic")
    with pytest.raises(ConfigurationError):
        ChannelStrategy(channel=999)


class _RecordingInjector:
    def __init__(self, clock: SimClock):
        self.clock = clock
        self.sent_at: list[tuple[int, bytes]] = []

    def send_frame(self, frame: CanFrame) -> None:
        self.sent_at.append((self.clock.now_us, frame.data))


def test_schedule_injection_one_shot_times() -> None:
    clock = SimClock()
    injector = _RecordingInjector(clock)
    schedule = ReplaySchedule(entries=(
        (0, CanFrame(JOY, b"\x01")),
        (50_000, CanFrame(JOY, b"\x02")),
        (100_000, CanFrame(JOY, b"\x03")),
    ))
    schedule_injection(clock, injector, schedule, start_us=10_000)
    clock.run_until(1_000_000)
    assert [t for t, _ in injector.sent_at] == [10_000, 60_000, 110_000]


def test_schedule_injection_repeat_uses_mean_gap() -> None:
    clock = SimClock()
    injector = _RecordingInjector(clock)
    schedule = ReplaySchedule(entries=(
        (0, CanFrame(JOY, b"\x01")),
        (50_000, CanFrame(JOY, b"\x02")),
        (100_000, CanFrame(JOY, b"\x03")),
    ))
    # span 100 ms over 2 gaps: mean 50 ms, cycle 150 ms
    schedule_injection(clock, injector, schedule, start_us=0,
                       repeat=True, end_us=400_000)
    clock.run_until(1_000_000)
    assert [t for t, _ in injector.sent_at] == [
        0, 50_000, 100_000,
        150_000, 200_000, 250_000,
        300_000, 350_000, 400_000,
    ]


def test_schedule_injection_repeat_needs_span_and_end() -> None:
    clock = SimClock()
    injector = _RecordingInjector(clock)
    single = ReplaySchedule(entries=((0, CanFrame(JOY, b"\x01")),))
    with pytest.raises(ConfigurationError):
        schedule_injection(clock, injector, single, 0, repeat=True, end_us=100)
    pair = ReplaySchedule(entries=((0, CanFrame(JOY, b"\x01")),
                                   (10, CanFrame(JOY, b"\x02"))))
    with pytest.raises(ConfigurationError):
        schedule_injection(clock, injector, pair, 0, repeat=True)  # no end
