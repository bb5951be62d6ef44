"""Beta-reputation trust: evidence counters with exponential forgetting.

Each observer keeps, per subject, a pair (alpha, beta) of positive/negative
evidence masses starting from the prior (1, 1).  A behavioral event adds
delta_alpha or delta_beta to the matching side and then both sides are
scaled by exp(-lambda * dt), where dt is the time since the previous update.
The trust score is E[T] = alpha / (alpha + beta); pure aging rescales both
sides by the same factor and therefore leaves the score exactly unchanged.

A subject is isolated when its score drops below the isolation threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import SimTime, US_PER_S

# Strictly positive floor that keeps the counters well-formed without ever
# engaging at reachable magnitudes (a prior-valued floor would distort the
# score under deep decay).
_FLOOR = 1e-300

INCREMENT_THEN_DECAY = "increment-then-decay"
DECAY_THEN_INCREMENT = "decay-then-increment"


@dataclass(frozen=True)
class TrustParams:
    delta_alpha: float = 1.0
    delta_beta: float = 2.0
    decay_lambda_per_s: float = 0.01
    isolation_threshold: float = 0.4
    prior: tuple[float, float] = (1.0, 1.0)
    decay_order: str = INCREMENT_THEN_DECAY

    def __post_init__(self) -> None:
        if self.decay_order not in (INCREMENT_THEN_DECAY, DECAY_THEN_INCREMENT):
            raise ValueError(f"unknown decay order {self.decay_order!r}")


@dataclass(slots=True)
class TrustRecord:
    """Beta evidence plus recency-weighted event counts.

    The counts age with the same factor as alpha/beta, so a gate like
    "at least two negative events" reads as "recently", matching the
    design goal that standing reflects current behavior.
    """

    alpha: float
    beta: float
    updated_at: SimTime
    n_positive: float = 0.0
    n_negative: float = 0.0


def new_record(params: TrustParams, now: SimTime = 0) -> TrustRecord:
    a0, b0 = params.prior
    return TrustRecord(alpha=a0, beta=b0, updated_at=now)


def expected_trust(record: TrustRecord) -> float:
    return record.alpha / (record.alpha + record.beta)


def _decay_factor(params: TrustParams, dt_us: SimTime) -> float:
    if dt_us <= 0:
        return 1.0
    return math.exp(-params.decay_lambda_per_s * (dt_us / US_PER_S))


def decay(record: TrustRecord, now: SimTime, params: TrustParams) -> None:
    """Age the evidence without new observations; the score is unchanged."""
    k = _decay_factor(params, now - record.updated_at)
    record.alpha = max(record.alpha * k, _FLOOR)
    record.beta = max(record.beta * k, _FLOOR)
    record.n_positive *= k
    record.n_negative *= k
    record.updated_at = max(record.updated_at, now)


def update(
    record: TrustRecord,
    positive: bool,
    now: SimTime,
    params: TrustParams,
    weight: float = 1.0,
) -> float:
    """Fold one behavioral observation into the record and return the new score.

    `weight` scales the evidence increment; second-hand reports are applied
    with reduced weight so gossip cannot outvote direct experience.
    """
    k = _decay_factor(params, now - record.updated_at)
    inc_a = params.delta_alpha * weight if positive else 0.0
    inc_b = params.delta_beta * weight if not positive else 0.0
    if params.decay_order == INCREMENT_THEN_DECAY:
        record.alpha = max((record.alpha + inc_a) * k, _FLOOR)
        record.beta = max((record.beta + inc_b) * k, _FLOOR)
        record.n_positive = (record.n_positive + (1.0 if positive else 0.0)) * k
        record.n_negative = (record.n_negative + (0.0 if positive else 1.0)) * k
    else:
        record.alpha = max(record.alpha * k + inc_a, _FLOOR)
        record.beta = max(record.beta * k + inc_b, _FLOOR)
        record.n_positive = record.n_positive * k + (1.0 if positive else 0.0)
        record.n_negative = record.n_negative * k + (0.0 if positive else 1.0)
    record.updated_at = max(record.updated_at, now)
    return expected_trust(record)


def is_isolated(record: TrustRecord, params: TrustParams) -> bool:
    return expected_trust(record) < params.isolation_threshold


class TrustTable:
    """One observer's view of every subject it has evidence about."""

    def __init__(self, params: TrustParams) -> None:
        self.params = params
        self.records: dict[int, TrustRecord] = {}

    def record_for(self, subject: int, now: SimTime = 0) -> TrustRecord:
        rec = self.records.get(subject)
        if rec is None:
            rec = new_record(self.params, now)
            self.records[subject] = rec
        return rec

    def expected(self, subject: int) -> float:
        rec = self.records.get(subject)
        if rec is None:
            a0, b0 = self.params.prior
            return a0 / (a0 + b0)
        return expected_trust(rec)

    def observe(self, subject: int, positive: bool, now: SimTime, weight: float = 1.0) -> float:
        return update(self.record_for(subject, now), positive, now, self.params, weight)

    def is_isolated(self, subject: int) -> bool:
        return self.expected(subject) < self.params.isolation_threshold

    def negative_count(self, subject: int) -> float:
        """Recency-weighted count of negative events logged for `subject`."""
        rec = self.records.get(subject)
        return 0.0 if rec is None else rec.n_negative
