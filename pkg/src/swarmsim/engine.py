"""Discrete-event core: virtual clock, ordered event queue, named RNG streams.

Simulated time is an integer count of microseconds (`SimTime`).  Events are
ordered by (fire_at, insertion sequence), so two events scheduled for the
same instant always pop in the order they were scheduled.  Randomness is
partitioned into independently seeded named streams so that, for example,
extra fading draws never perturb the mobility trajectory of an otherwise
identical run.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

SimTime = int  # integer microseconds since simulation start

US_PER_MS = 1_000
US_PER_S = 1_000_000


def us_from_ms(ms: float) -> SimTime:
    return int(round(ms * US_PER_MS))


def us_from_s(s: float) -> SimTime:
    return int(round(s * US_PER_S))


def seconds(t: SimTime) -> float:
    return t / US_PER_S


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


@dataclass(slots=True)
class Event:
    """A single scheduled occurrence.

    `seq` is assigned by the queue at insertion and breaks ties among events
    that share a `fire_at`.
    """

    fire_at: SimTime
    seq: int
    kind: str
    payload: Any = None


class EventQueue:
    """Min-heap of events keyed on (fire_at, seq)."""

    def __init__(self) -> None:
        self._heap: list[tuple[SimTime, int, Event]] = []
        self._next_seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, fire_at: SimTime, kind: str, payload: Any = None) -> Event:
        event = Event(fire_at=fire_at, seq=self._next_seq, kind=kind, payload=payload)
        self._next_seq += 1
        heapq.heappush(self._heap, (fire_at, event.seq, event))
        return event

    def peek(self) -> Event | None:
        return self._heap[0][2] if self._heap else None

    def pop(self) -> Event:
        if not self._heap:
            raise IndexError("pop from empty event queue")
        return heapq.heappop(self._heap)[2]


def _stream_entropy(name: str) -> int:
    # Stable across runs and platforms, unlike hash().
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "big")


class RngStreams:
    """Named, independently seeded random generators.

    Each stream is derived from (root seed, sha256(name)), so adding draws to
    one stream cannot shift the sequence seen by any other.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._streams: dict[str, np.random.Generator] = {}

    def stream(self, name: str) -> np.random.Generator:
        gen = self._streams.get(name)
        if gen is None:
            gen = np.random.default_rng([self.seed, _stream_entropy(name)])
            self._streams[name] = gen
        return gen

    def __getitem__(self, name: str) -> np.random.Generator:
        return self.stream(name)


@dataclass
class Simulator:
    """Single-threaded event loop with a monotonic integer clock."""

    seed: int = 0
    clock: SimTime = 0
    queue: EventQueue = field(default_factory=EventQueue)
    handlers: dict[str, Callable[["Simulator", Event], None]] = field(default_factory=dict)
    processed: int = 0

    def __post_init__(self) -> None:
        self.rng = RngStreams(self.seed)

    def on(self, kind: str, handler: Callable[["Simulator", Event], None]) -> None:
        self.handlers[kind] = handler

    def schedule_at(self, fire_at: SimTime, kind: str, payload: Any = None) -> Event:
        if fire_at < self.clock:
            raise SchedulingError(
                f"event {kind!r} scheduled at {fire_at} before clock {self.clock}"
            )
        return self.queue.schedule(fire_at, kind, payload)

    def schedule_in(self, delay: SimTime, kind: str, payload: Any = None) -> Event:
        return self.schedule_at(self.clock + delay, kind, payload)

    def run_until(
        self,
        t_end: SimTime,
        stop_check: Callable[[], bool] | None = None,
    ) -> int:
        """Process events with fire_at <= t_end in order; returns count processed.

        The clock never runs backwards and always lands on t_end when the
        horizon is reached, even if the queue drained early.  `stop_check`
        is consulted after every event and ends the run early when true.
        """
        processed_before = self.processed
        while True:
            head = self.queue.peek()
            if head is None or head.fire_at > t_end:
                break
            event = self.queue.pop()
            if event.fire_at < self.clock:
                raise SchedulingError("event queue produced a past event")
            self.clock = event.fire_at
            handler = self.handlers.get(event.kind)
            if handler is not None:
                handler(self, event)
            self.processed += 1
            if stop_check is not None and stop_check():
                return self.processed - processed_before
        self.clock = max(self.clock, t_end)
        return self.processed - processed_before
