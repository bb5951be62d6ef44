"""Superframe layout, slot math, and slotted CSMA/CA contention."""

from __future__ import annotations

import numpy as np
import pytest

from swarmsim.engine import RngStreams
from swarmsim.mac import (
    HEADER_BYTES,
    BackoffState,
    Contender,
    Frame,
    FrameKind,
    SuperframeConfig,
    build_superframe,
    run_contention_window,
    sleep_plan,
    slot_capacity,
)


class ZeroRng:
    """Stand-in generator whose integer draws are always zero, forcing every
    contender to fire in the first backoff slot."""

    def integers(self, low, high):
        return 0


def data_frame(src, dst=0, payload=256, trailer=28, seq=0):
    return Frame(FrameKind.DATA, src, dst, seq, payload_bytes=payload, trailer_bytes=trailer)


def contender(node_id, config, airtime=293):
    return Contender(
        node_id=node_id,
        frame=data_frame(node_id),
        airtime_us=airtime,
        backoff=BackoffState.fresh(config),
    )


class TestFrames:
    def test_total_bytes_includes_header_and_trailer(self):
        f = data_frame(1)
        assert f.total_bytes == HEADER_BYTES + 256 + 28 == 293

    def test_control_classification(self):
        assert FrameKind.BEACON.is_control
        assert FrameKind.JOIN.is_control
        assert FrameKind.TRUST_REPORT.is_control
        assert not FrameKind.DATA.is_control
        assert not FrameKind.RELAY.is_control

    def test_control_bytes_cover_whole_control_frame(self):
        beacon = Frame(FrameKind.BEACON, 1, 0, 0, payload_bytes=43, trailer_bytes=28)
        assert beacon.control_bytes == HEADER_BYTES + 43 == 52
        assert beacon.security_bytes == 28
        assert data_frame(1).control_bytes == 0


class TestSuperframeLayout:
    def test_windows_tile_the_frame_exactly(self):
        cfg = SuperframeConfig()
        assert cfg.scheduled_us + cfg.contention_us + cfg.broadcast_us == cfg.frame_us
        assert cfg.frame_us == 100_000
        assert cfg.contention_offset == 70_000
        assert cfg.broadcast_offset == 90_000

    def test_frame_indexing_round_trips(self):
        cfg = SuperframeConfig()
        assert cfg.frame_index(0) == 0
        assert cfg.frame_index(99_999) == 0
        assert cfg.frame_index(100_000) == 1
        assert cfg.frame_start(7) == 700_000

    def test_three_members_split_thirty_ms_evenly(self):
        cfg = SuperframeConfig(scheduled_us=30_000, guard_us=0)
        sf = build_superframe(cfg, 0, [4, 5, 6])
        assert [(s.owner, s.offset_us, s.length_us) for s in sf.slots] == [
            (4, 0, 10_000),
            (5, 10_000, 10_000),
            (6, 20_000, 10_000),
        ]

    def test_single_member_takes_whole_window(self):
        cfg = SuperframeConfig()
        sf = build_superframe(cfg, 0, [9])
        assert sf.slots[0].length_us == cfg.scheduled_us

    def test_no_members_no_slots(self):
        sf = build_superframe(SuperframeConfig(), 0, [])
        assert sf.slots == []

    def test_slots_never_overlap_or_overrun(self):
        cfg = SuperframeConfig(guard_us=200)
        sf = build_superframe(cfg, 0, list(range(7)))
        end = 0
        for slot in sf.slots:
            assert slot.offset_us >= end
            end = slot.offset_us + slot.length_us
        assert end <= cfg.scheduled_us

    def test_slot_lookup(self):
        sf = build_superframe(SuperframeConfig(), 0, [4, 5])
        assert sf.slot_for(5).owner == 5
        assert sf.slot_for(99) is None

    def test_slot_capacity_floor(self):
        assert slot_capacity(10_000, 2_048) == 4

    def test_slot_capacity_degenerate(self):
        assert slot_capacity(10_000, 0) == 0
        assert slot_capacity(100, 2_048) == 0

    def test_sleep_plan_covers_whole_frame(self):
        cfg = SuperframeConfig()
        sf = build_superframe(cfg, 0, [1, 2, 3])
        awake, asleep = sleep_plan(cfg, sf.slots[0])
        assert awake + asleep == cfg.frame_us
        # A member wakes for its own slot plus the shared windows and
        # sleeps through the other members' slots.
        assert awake == 23_333 + 20_000 + 10_000
        assert sleep_plan(cfg, None)[0] == 30_000


class TestBackoff:
    def test_exponential_doubling_caps(self):
        cfg = SuperframeConfig()
        b = BackoffState.fresh(cfg)
        widths = [b.cw]
        for _ in range(4):
            b.on_collision(cfg)
            widths.append(b.cw)
        assert widths == [32, 64, 128, 256, 256]

    def test_success_resets_window_and_failures(self):
        cfg = SuperframeConfig()
        b = BackoffState.fresh(cfg)
        b.on_collision(cfg)
        b.on_collision(cfg)
        b.on_success(cfg)
        assert b.cw == cfg.cw_min
        assert b.failures == 0
        assert b.counter is None

    def test_retry_budget(self):
        cfg = SuperframeConfig()
        b = BackoffState.fresh(cfg)
        verdicts = [b.on_collision(cfg) for _ in range(cfg.retry_limit + 1)]
        assert verdicts == [True] * cfg.retry_limit + [False]

    def test_draw_in_contention_window(self):
        cfg = SuperframeConfig()
        rng = RngStreams(3).stream("backoff")
        b = BackoffState.fresh(cfg)
        draws = {b.draw(cfg, rng) for _ in range(500)}
        assert min(draws) >= 0
        assert max(draws) < cfg.cw_min


class TestContentionWindow:
    def test_sole_contender_transmits_clean(self):
        cfg = SuperframeConfig()
        rng = RngStreams(1).stream("backoff")
        tx, done, dropped = run_contention_window(cfg, 20_000, [contender(5, cfg)], rng)
        assert [c.node_id for c in done] == [5]
        assert dropped == []
        assert len(tx) == 1
        assert not tx[0].collided
        assert tx[0].senders == (5,)

    def test_forced_tie_collides_then_recovers(self):
        cfg = SuperframeConfig()
        a, b = contender(1, cfg), contender(2, cfg)
        a.backoff.counter = 0
        b.backoff.counter = 0
        tx, done, dropped = run_contention_window(
            cfg, 20_000, [a, b], RngStreams(8).stream("backoff")
        )
        assert tx[0].collided
        assert set(tx[0].senders) == {1, 2}
        # Both should eventually win separate retransmissions.
        assert {c.node_id for c in done} == {1, 2}
        assert dropped == []

    def test_persistent_collisions_exhaust_retries(self):
        cfg = SuperframeConfig()
        a, b = contender(1, cfg), contender(2, cfg)
        tx, done, dropped = run_contention_window(cfg, 1_000_000, [a, b], ZeroRng())
        assert done == []
        assert {c.node_id for c in dropped} == {1, 2}
        assert all(t.collided for t in tx)
        assert len(tx) == cfg.retry_limit + 1

    def test_oversized_frame_defers_without_penalty(self):
        cfg = SuperframeConfig()
        c = contender(1, cfg, airtime=50_000)
        tx, done, dropped = run_contention_window(cfg, 20_000, [c], ZeroRng())
        assert tx == [] and done == [] and dropped == []
        assert c.backoff.failures == 0

    def test_deferred_contender_keeps_backoff_counter(self):
        cfg = SuperframeConfig()
        c = contender(1, cfg)
        c.backoff.counter = 500  # cannot reach zero inside one window
        tx, done, dropped = run_contention_window(
            cfg, 20_000, [c], RngStreams(2).stream("backoff")
        )
        assert done == [] and dropped == []
        assert c.backoff.counter == 500 - 20_000 // cfg.backoff_slot_us

    def test_transmissions_fit_inside_window(self):
        cfg = SuperframeConfig()
        rng = RngStreams(12).stream("backoff")
        contenders = [contender(i, cfg) for i in range(25)]
        window = 20_000
        tx, done, dropped = run_contention_window(cfg, window, contenders, rng)
        for t in tx:
            assert t.start_us >= 0
            assert t.start_us + t.duration_us <= window

    def test_same_seed_same_outcome(self):
        cfg = SuperframeConfig()

        def play(seed):
            rng = RngStreams(seed).stream("backoff")
            contenders = [contender(i, cfg) for i in range(10)]
            tx, done, dropped = run_contention_window(cfg, 20_000, contenders, rng)
            return (
                [(t.start_us, t.senders, t.collided) for t in tx],
                [c.node_id for c in done],
                [c.node_id for c in dropped],
            )

        assert play(5) == play(5)

    def test_all_contenders_accounted_for(self):
        cfg = SuperframeConfig()
        contenders = [contender(i, cfg) for i in range(12)]
        tx, done, dropped = run_contention_window(
            cfg, 20_000, contenders, RngStreams(4).stream("backoff")
        )
        finished = {c.node_id for c in done} | {c.node_id for c in dropped}
        leftover = {c.node_id for c in contenders} - finished
        # Anyone not finished must still hold a frozen backoff counter.
        for c in contenders:
            if c.node_id in leftover:
                assert c.backoff.counter is not None
