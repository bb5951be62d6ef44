"""Run bookkeeping: packet ledger, byte counters, and summary statistics.

Every generated packet is tracked to exactly one terminal state (delivered,
dropped with a reason, or still in flight at the horizon), which makes
packet conservation auditable.  Byte accounting is kept twice on purpose:
once from per-frame records and once from transmitter-side counters; the
two must agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import SimTime, seconds
from .mac import Frame


@dataclass(slots=True)
class PacketRecord:
    packet_id: int
    src: int
    dst: int
    sent_at: SimTime
    payload_bytes: int
    delivered_at: SimTime | None = None
    dropped_at: SimTime | None = None
    drop_reason: str | None = None
    hops: int = 0


class PacketLedger:
    """Append-only packet accounting with conservation checks."""

    def __init__(self) -> None:
        self.records: dict[int, PacketRecord] = {}
        self._next_id = 0

    def create(self, src: int, dst: int, sent_at: SimTime, payload_bytes: int) -> PacketRecord:
        rec = PacketRecord(self._next_id, src, dst, sent_at, payload_bytes)
        self._next_id += 1
        self.records[rec.packet_id] = rec
        return rec

    def deliver(self, packet_id: int, at: SimTime) -> None:
        rec = self.records[packet_id]
        if rec.delivered_at is not None or rec.dropped_at is not None:
            raise ValueError(f"packet {packet_id} already terminal")
        rec.delivered_at = at

    def drop(self, packet_id: int, at: SimTime, reason: str) -> None:
        rec = self.records[packet_id]
        if rec.delivered_at is not None or rec.dropped_at is not None:
            return  # first terminal state wins; late duplicates are ignored
        rec.dropped_at = at
        rec.drop_reason = reason

    # -- aggregate views -------------------------------------------------

    @property
    def generated(self) -> int:
        return len(self.records)

    @property
    def delivered(self) -> int:
        return sum(1 for r in self.records.values() if r.delivered_at is not None)

    @property
    def dropped(self) -> int:
        return sum(1 for r in self.records.values() if r.dropped_at is not None)

    @property
    def in_flight(self) -> int:
        return self.generated - self.delivered - self.dropped

    def drop_reasons(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.records.values():
            if r.drop_reason is not None:
                out[r.drop_reason] = out.get(r.drop_reason, 0) + 1
        return dict(sorted(out.items()))

    def conservation_ok(self) -> bool:
        return self.delivered + self.dropped + self.in_flight == self.generated

    def delays_us(self) -> list[SimTime]:
        return [
            r.delivered_at - r.sent_at
            for r in sorted(self.records.values(), key=lambda r: r.packet_id)
            if r.delivered_at is not None
        ]


def pdr(ledger: PacketLedger) -> float:
    """Delivered fraction of generated packets; 0.0 when nothing was sent."""
    if ledger.generated == 0:
        return 0.0
    return ledger.delivered / ledger.generated


def delay_stats(delays_us: list[SimTime]) -> dict[str, float | None]:
    """Mean / median / nearest-rank p95 over delivered packets, in ms."""
    n = len(delays_us)
    if n == 0:
        return {"count": 0, "mean_ms": None, "median_ms": None, "p95_ms": None}
    ordered = sorted(delays_us)
    mean = sum(ordered) / n
    mid = n // 2
    median = ordered[mid] if n % 2 == 1 else (ordered[mid - 1] + ordered[mid]) / 2
    rank = max(1, -(-95 * n // 100))  # ceil(0.95 * n), nearest-rank definition
    p95 = ordered[rank - 1]
    return {
        "count": n,
        "mean_ms": mean / 1_000.0,
        "median_ms": median / 1_000.0,
        "p95_ms": p95 / 1_000.0,
    }


@dataclass
class ByteCounters:
    """Transmitted-byte totals split into overhead classes."""

    control_bytes: int = 0
    security_bytes: int = 0
    total_bytes: int = 0
    frames: int = 0

    def add_frame(self, frame: Frame) -> None:
        self.control_bytes += frame.control_bytes
        self.security_bytes += frame.security_bytes
        self.total_bytes += frame.total_bytes
        self.frames += 1

    def merge(self, other: "ByteCounters") -> None:
        self.control_bytes += other.control_bytes
        self.security_bytes += other.security_bytes
        self.total_bytes += other.total_bytes
        self.frames += other.frames

    def as_dict(self) -> dict[str, int]:
        return {
            "control_bytes": self.control_bytes,
            "security_bytes": self.security_bytes,
            "total_bytes": self.total_bytes,
            "frames": self.frames,
        }


def overhead_fraction(control_bytes: int, security_bytes: int, total_bytes: int) -> float:
    """Share of transmitted bytes spent on control plus security trailers."""
    if total_bytes == 0:
        return 0.0
    return (control_bytes + security_bytes) / total_bytes


def detection_rate(flagged: set[int], malicious: set[int]) -> float | None:
    """Fraction of truly malicious nodes flagged; None when none exist."""
    if not malicious:
        return None
    return len(flagged & malicious) / len(malicious)


def false_positive_rate(flagged: set[int], malicious: set[int], all_nodes: set[int]) -> float:
    benign = all_nodes - malicious
    if not benign:
        return 0.0
    return len(flagged & benign) / len(benign)


def audit_scheduled_collisions(trace: list[dict]) -> dict[str, int]:
    """Sweep the trace for overlapping scheduled-window transmissions.

    Transmissions overlap when their [t, t+dur) intervals intersect on the
    same cluster channel.  An overlap made entirely of schedule-compliant
    frames indicates a slot-assignment bug; overlaps involving an
    out-of-slot transmitter are deliberate interference and only show up
    in the total.
    """
    by_channel: dict[object, list[tuple[SimTime, SimTime, bool]]] = {}
    for rec in trace:
        if rec.get("kind") == "tx" and rec.get("window") == "scheduled":
            by_channel.setdefault(rec["channel"], []).append(
                (rec["t"], rec["t"] + rec["dur"], bool(rec.get("compliant")))
            )
    total = 0
    compliant_only = 0
    for intervals in by_channel.values():
        intervals.sort()
        active: list[tuple[SimTime, bool]] = []
        for start, end, ok in intervals:
            active = [(e, c) for e, c in active if e > start]
            for _, c in active:
                total += 1
                if ok and c:
                    compliant_only += 1
            active.append((end, ok))
    return {"total_overlaps": total, "compliant_overlaps": compliant_only}


def lifetime_marks(
    death_times: dict[int, SimTime], swarm_size: int
) -> dict[str, float | None]:
    """Seconds to first death and to half the swarm dead; None if not reached."""
    if not death_times:
        return {"first_death_s": None, "half_death_s": None}
    ordered = sorted(death_times.values())
    first = seconds(ordered[0])
    half_index = swarm_size // 2  # strictly more than half the swarm dead
    half = seconds(ordered[half_index]) if len(ordered) > half_index else None
    return {"first_death_s": first, "half_death_s": half}
