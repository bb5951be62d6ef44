"""Adversarial node behaviors and the watchdog observation model.

Supported behaviors:

* ``blackhole`` -- accepts traffic for relaying, silently drops all of it;
* ``grayhole`` -- drops each relayable packet with a fixed probability;
* ``mac-violator`` -- transmits outside its assigned slot at a configured
  rate, corrupting the victim slot.

Relay-seeking attackers also advertise inflated energy/connectivity during
elections (the classic attract-then-drop pattern).  A profile whose knobs
are all zero is inert: it draws nothing from the adversary RNG stream and
changes no decision, so such a run is bit-identical to one without the
adversary module at all.

Watchdog rule: the previous hop listens for its packet being relayed.  An
overheard relay is positive evidence, a missed deadline is negative, and an
observer that could not hear the relay channel reports nothing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .engine import SimTime
from .trust import TrustTable

BLACKHOLE = "blackhole"
GRAYHOLE = "grayhole"
MAC_VIOLATOR = "mac-violator"

KINDS = (BLACKHOLE, GRAYHOLE, MAC_VIOLATOR)


class Verdict(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AdversaryProfile:
    kind: str
    drop_prob: float = 0.0
    violation_rate: float = 0.0  # violation attempts per superframe
    active_from_us: SimTime = 0
    score_inflation: float = 0.15

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError(f"drop_prob must be in [0, 1], got {self.drop_prob}")
        if self.violation_rate < 0.0:
            raise ValueError("violation_rate must be non-negative")

    @property
    def inert(self) -> bool:
        """True when the profile can never change behavior (benign equivalent)."""
        return self.drop_prob == 0.0 and self.violation_rate == 0.0

    def active(self, now: SimTime) -> bool:
        return not self.inert and now >= self.active_from_us

    def seeks_relay_role(self, now: SimTime) -> bool:
        """Whether the node lies about candidacy inputs to attract traffic."""
        return self.active(now) and self.drop_prob > 0.0


def should_drop(profile: AdversaryProfile | None, now: SimTime, rng: np.random.Generator) -> bool:
    """Relay decision for one packet.  Certain outcomes never touch the RNG."""
    if profile is None or not profile.active(now):
        return False
    if profile.drop_prob <= 0.0:
        return False
    if profile.drop_prob >= 1.0:
        return True
    return bool(rng.random() < profile.drop_prob)


def violations_this_frame(
    profile: AdversaryProfile | None, now: SimTime, rng: np.random.Generator
) -> int:
    """Number of out-of-slot transmissions the violator attempts this frame."""
    if profile is None or not profile.active(now) or profile.violation_rate <= 0.0:
        return 0
    rate = profile.violation_rate
    whole = int(rate)
    frac = rate - whole
    if frac > 0.0 and rng.random() < frac:
        whole += 1
    return whole


@dataclass(slots=True)
class Observation:
    observer: int
    subject: int
    verdict: Verdict
    at: SimTime
    reason: str = ""


def observe_forwarding(
    observer: int,
    subject: int,
    at: SimTime,
    overheard: bool,
    could_listen: bool,
    deadline_passed: bool,
) -> Observation | None:
    """Classify one watchdog episode; None when there is nothing to record yet."""
    if overheard:
        return Observation(observer, subject, Verdict.POSITIVE, at, "relay-overheard")
    if not could_listen:
        if deadline_passed:
            return Observation(observer, subject, Verdict.INCONCLUSIVE, at, "out-of-range")
        return None
    if deadline_passed:
        return Observation(observer, subject, Verdict.NEGATIVE, at, "relay-timeout")
    return None


def detection_status(
    subject: int,
    peer_tables: dict[int, TrustTable],
    quorum: float = 0.5,
) -> tuple[bool, float]:
    """Quorum vote: flagged when >= `quorum` of peers hold the subject isolated.

    `peer_tables` maps peer id -> that peer's trust table; the subject's own
    table, if present, is ignored.  Returns (flagged, voting fraction).
    """
    voters = [t for pid, t in peer_tables.items() if pid != subject]
    if not voters:
        return False, 0.0
    below = sum(1 for t in voters if t.is_isolated(subject))
    fraction = below / len(voters)
    return fraction >= quorum, fraction
