"""Event queue ordering, clock discipline, and named RNG streams."""

from __future__ import annotations

import numpy as np
import pytest

from swarmsim.engine import (
    EventQueue,
    RngStreams,
    SchedulingError,
    Simulator,
    seconds,
    us_from_ms,
    us_from_s,
)


class TestTimeHelpers:
    def test_unit_conversions(self):
        assert us_from_ms(100) == 100_000
        assert us_from_s(2.5) == 2_500_000
        assert seconds(1_500_000) == 1.5

    def test_times_are_integers(self):
        assert isinstance(us_from_s(0.1), int)
        assert isinstance(us_from_ms(0.5), int)


class TestEventQueue:
    def test_pop_orders_by_time(self):
        q = EventQueue()
        for t in (7, 3, 5):
            q.schedule(t, "tick", None)
        assert [q.pop().fire_at for _ in range(3)] == [3, 5, 7]

    def test_ties_break_by_schedule_order(self):
        q = EventQueue()
        first = q.schedule(5, "a", None)
        second = q.schedule(5, "b", None)
        assert first.seq < second.seq
        assert q.pop().kind == "a"
        assert q.pop().kind == "b"

    def test_peek_does_not_remove(self):
        q = EventQueue()
        q.schedule(9, "x", None)
        assert q.peek().fire_at == 9
        assert len(q) == 1
        q.pop()
        assert q.peek() is None

    def test_interleaved_schedule_and_pop(self):
        q = EventQueue()
        q.schedule(10, "late", None)
        q.schedule(2, "early", None)
        assert q.pop().kind == "early"
        q.schedule(4, "mid", None)
        assert q.pop().kind == "mid"
        assert q.pop().kind == "late"


class TestSimulator:
    def test_clock_lands_on_end_with_empty_queue(self):
        sim = Simulator(seed=1)
        sim.run_until(123_456)
        assert sim.clock == 123_456

    def test_clock_never_runs_backwards(self):
        sim = Simulator(seed=1)
        seen = []
        sim.on("tick", lambda s, e: seen.append(s.clock))
        for t in (50, 10, 30, 10, 40):
            sim.schedule_at(t, "tick", None)
        sim.run_until(100)
        assert seen == sorted(seen)
        assert sim.clock == 100

    def test_schedule_in_is_relative(self):
        sim = Simulator(seed=1)
        fired = []
        sim.on("tick", lambda s, e: fired.append(s.clock))
        sim.schedule_in(25, "tick", None)
        sim.run_until(100)
        assert fired == [25]

    def test_schedule_at_past_raises(self):
        sim = Simulator(seed=1)
        sim.on("tick", lambda s, e: None)
        sim.schedule_at(10, "tick", None)
        sim.run_until(10)
        with pytest.raises(SchedulingError):
            sim.schedule_at(5, "tick", None)

    def test_handlers_can_chain_events(self):
        sim = Simulator(seed=1)
        fired = []

        def relay(s, event):
            fired.append(s.clock)
            if s.clock < 30:
                s.schedule_in(10, "tick", None)

        sim.on("tick", relay)
        sim.schedule_at(10, "tick", None)
        sim.run_until(100)
        assert fired == [10, 20, 30]

    def test_stop_check_halts_early(self):
        sim = Simulator(seed=1)
        count = []
        sim.on("tick", lambda s, e: count.append(s.clock))
        for t in range(10, 110, 10):
            sim.schedule_at(t, "tick", None)
        sim.run_until(200, stop_check=lambda: len(count) >= 3)
        assert len(count) == 3
        assert sim.clock < 200

    def test_unhandled_event_kind_is_skipped(self):
        sim = Simulator(seed=1)
        sim.schedule_at(5, "mystery", None)
        assert sim.run_until(10) == 1
        assert sim.clock == 10


class TestRngStreams:
    def test_same_seed_same_draws(self):
        a = RngStreams(42)
        b = RngStreams(42)
        assert a.stream("mobility").random(8).tolist() == b.stream("mobility").random(8).tolist()

    def test_different_seeds_differ(self):
        a = RngStreams(1).stream("fading").random(8)
        b = RngStreams(2).stream("fading").random(8)
        assert not np.allclose(a, b)

    def test_streams_are_independent(self):
        # Extra draws on one stream must not shift another stream's sequence.
        plain = RngStreams(42)
        noisy = RngStreams(42)
        noisy.stream("mobility").random(1000)
        assert (
            plain.stream("backoff").random(16).tolist()
            == noisy.stream("backoff").random(16).tolist()
        )

    def test_named_streams_differ_from_each_other(self):
        streams = RngStreams(42)
        a = streams.stream("mobility").random(8)
        b = streams.stream("fading").random(8)
        assert not np.allclose(a, b)

    def test_get_returns_same_generator(self):
        streams = RngStreams(42)
        assert streams.stream("adversary") is streams.stream("adversary")
