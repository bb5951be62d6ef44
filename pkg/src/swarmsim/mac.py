"""Hybrid superframe MAC: TDMA uplink slots plus slotted CSMA/CA contention.

Every 100 ms superframe tiles the timeline exactly and is split into three
windows, in this order:

* scheduled window -- equal TDMA slots for registered cluster members, in
  registration order, used for member-to-head telemetry;
* contention window -- slotted CSMA/CA with binary exponential backoff,
  shared by inter-cluster relays, join requests, and trust reports;
* broadcast window -- reserved for cluster-head beacons carrying the next
  frame's schedule.

Members therefore sleep through everyone else's slots and wake only for the
contention window, their own slot, and the broadcast window.  Heads stay
awake for the whole frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .engine import SimTime

HEADER_BYTES = 9  # type(1) + src(2) + dst(2) + seq(4)


class FrameKind(enum.Enum):
    DATA = "data"
    RELAY = "relay"
    BEACON = "beacon"
    JOIN = "join"
    TRUST_REPORT = "trust-report"

    @property
    def is_control(self) -> bool:
        return self in (FrameKind.BEACON, FrameKind.JOIN, FrameKind.TRUST_REPORT)


@dataclass(slots=True)
class Frame:
    kind: FrameKind
    src: int
    dst: int
    seq: int
    payload_bytes: int
    trailer_bytes: int = 0
    packet_ids: tuple[int, ...] = ()
    envelope: object = None

    @property
    def total_bytes(self) -> int:
        return HEADER_BYTES + self.payload_bytes + self.trailer_bytes

    @property
    def control_bytes(self) -> int:
        """Bytes counted as protocol control overhead (full control frames)."""
        return HEADER_BYTES + self.payload_bytes if self.kind.is_control else 0

    @property
    def security_bytes(self) -> int:
        return self.trailer_bytes


@dataclass(frozen=True)
class SuperframeConfig:
    scheduled_us: SimTime = 70_000
    contention_us: SimTime = 20_000
    broadcast_us: SimTime = 10_000
    guard_us: SimTime = 0
    backoff_slot_us: SimTime = 100
    cw_min: int = 32
    cw_max: int = 256
    retry_limit: int = 6

    @property
    def frame_us(self) -> SimTime:
        return self.scheduled_us + self.contention_us + self.broadcast_us

    @property
    def contention_offset(self) -> SimTime:
        return self.scheduled_us

    @property
    def broadcast_offset(self) -> SimTime:
        return self.scheduled_us + self.contention_us

    def frame_index(self, t: SimTime) -> int:
        return t // self.frame_us

    def frame_start(self, index: int) -> SimTime:
        return index * self.frame_us


@dataclass(slots=True)
class Slot:
    owner: int
    offset_us: SimTime  # relative to superframe start
    length_us: SimTime


@dataclass
class Superframe:
    """One cluster's slot map for a single frame index."""

    config: SuperframeConfig
    index: int
    slots: list[Slot]

    def slot_for(self, member: int) -> Slot | None:
        for slot in self.slots:
            if slot.owner == member:
                return slot
        return None


def build_superframe(config: SuperframeConfig, index: int, members: list[int]) -> Superframe:
    """Split the scheduled window evenly among members, registration order."""
    slots: list[Slot] = []
    if members:
        usable = config.scheduled_us - config.guard_us * len(members)
        length = usable // len(members)
        offset = 0
        for owner in members:
            slots.append(Slot(owner=owner, offset_us=offset, length_us=length))
            offset += length + config.guard_us
    return Superframe(config=config, index=index, slots=slots)


def slot_capacity(slot_length_us: SimTime, frame_airtime_us: SimTime) -> int:
    """Whole frames that fit in one slot."""
    if frame_airtime_us <= 0:
        return 0
    return slot_length_us // frame_airtime_us


def sleep_plan(config: SuperframeConfig, slot: Slot | None) -> tuple[SimTime, SimTime]:
    """(awake_us, asleep_us) for a member honoring the default wake policy."""
    awake = config.contention_us + config.broadcast_us
    if slot is not None:
        awake += slot.length_us
    return awake, config.frame_us - awake


@dataclass(slots=True)
class BackoffState:
    """Per-node binary exponential backoff, persistent across windows."""

    cw: int
    counter: int | None = None
    failures: int = 0

    @classmethod
    def fresh(cls, config: SuperframeConfig) -> "BackoffState":
        return cls(cw=config.cw_min)

    def draw(self, config: SuperframeConfig, rng: np.random.Generator) -> int:
        self.counter = int(rng.integers(0, self.cw))
        return self.counter

    def on_success(self, config: SuperframeConfig) -> None:
        self.cw = config.cw_min
        self.counter = None
        self.failures = 0

    def on_collision(self, config: SuperframeConfig) -> bool:
        """Register a failed attempt; True if the frame may be retried."""
        self.failures += 1
        self.cw = min(self.cw * 2, config.cw_max)
        self.counter = None
        return self.failures <= config.retry_limit


@dataclass(slots=True)
class Contender:
    """One node's head-of-line frame inside a contention window."""

    node_id: int
    frame: Frame
    airtime_us: SimTime
    backoff: BackoffState


@dataclass(slots=True)
class Transmission:
    """A (possibly colliding) burst observed on the air during contention."""

    start_us: SimTime  # relative to window start
    duration_us: SimTime
    frames: tuple[Frame, ...]
    senders: tuple[int, ...]
    collided: bool


def run_contention_window(
    config: SuperframeConfig,
    window_us: SimTime,
    contenders: list[Contender],
    rng: np.random.Generator,
) -> tuple[list[Transmission], list[Contender], list[Contender]]:
    """Simulate one slotted CSMA/CA window on a single channel.

    Returns (transmissions, delivered_ok, dropped).  Contenders that neither
    transmitted successfully nor exhausted their retries keep their backoff
    state (counter frozen) and stay queued for the next window.  A ready
    frame that no longer fits before the window closes defers without a
    retry penalty.
    """
    transmissions: list[Transmission] = []
    done: list[Contender] = []
    dropped: list[Contender] = []
    active = sorted(contenders, key=lambda c: c.node_id)
    for c in active:
        if c.backoff.counter is None:
            c.backoff.draw(config, rng)
    t: SimTime = 0
    while active and t + config.backoff_slot_us <= window_us:
        ready = [c for c in active if c.backoff.counter == 0]
        if not ready:
            t += config.backoff_slot_us
            for c in active:
                c.backoff.counter -= 1
            continue
        fitting = [c for c in ready if t + c.airtime_us <= window_us]
        if not fitting:
            break  # deadline defers the rest to the next window
        if len(fitting) == 1:
            c = fitting[0]
            transmissions.append(
                Transmission(
                    start_us=t,
                    duration_us=c.airtime_us,
                    frames=(c.frame,),
                    senders=(c.node_id,),
                    collided=False,
                )
            )
            t += c.airtime_us
            c.backoff.on_success(config)
            active.remove(c)
            done.append(c)
        else:
            duration = max(c.airtime_us for c in fitting)
            transmissions.append(
                Transmission(
                    start_us=t,
                    duration_us=duration,
                    frames=tuple(c.frame for c in fitting),
                    senders=tuple(c.node_id for c in fitting),
                    collided=True,
                )
            )
            t += duration
            for c in fitting:
                if c.backoff.on_collision(config):
                    c.backoff.draw(config, rng)
                else:
                    active.remove(c)
                    dropped.append(c)
    return transmissions, done, dropped
