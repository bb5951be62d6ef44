"""Attacker profiles, watchdog verdicts, and quorum detection."""

from __future__ import annotations

import numpy as np
import pytest

from swarmsim.adversary import (
    BLACKHOLE,
    GRAYHOLE,
    MAC_VIOLATOR,
    AdversaryProfile,
    Verdict,
    detection_status,
    observe_forwarding,
    should_drop,
    violations_this_frame,
)
from swarmsim.trust import TrustParams, TrustTable


class CountingRng:
    """Records how many variates were requested; fails loudly if asked."""

    def __init__(self):
        self.calls = 0

    def random(self):
        self.calls += 1
        return 0.5


class TestProfileValidation:
    def test_known_kinds_accepted(self):
        for kind in (BLACKHOLE, GRAYHOLE, MAC_VIOLATOR):
            AdversaryProfile(kind=kind)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            AdversaryProfile(kind="wormhole")

    def test_drop_prob_range(self):
        with pytest.raises(ValueError):
            AdversaryProfile(kind=GRAYHOLE, drop_prob=1.5)
        with pytest.raises(ValueError):
            AdversaryProfile(kind=GRAYHOLE, drop_prob=-0.1)

    def test_violation_rate_range(self):
        with pytest.raises(ValueError):
            AdversaryProfile(kind=MAC_VIOLATOR, violation_rate=-1.0)


class TestActivation:
    def test_zeroed_profile_is_inert(self):
        p = AdversaryProfile(kind=GRAYHOLE, drop_prob=0.0, violation_rate=0.0)
        assert p.inert
        assert not p.active(10**9)
        assert not p.seeks_relay_role(10**9)

    def test_activation_time_gates_behavior(self):
        p = AdversaryProfile(kind=BLACKHOLE, drop_prob=1.0, active_from_us=1000)
        assert not p.active(999)
        assert p.active(1000)

    def test_dropper_seeks_relay_role(self):
        p = AdversaryProfile(kind=BLACKHOLE, drop_prob=1.0)
        assert p.seeks_relay_role(0)

    def test_pure_violator_does_not_seek_relay_role(self):
        p = AdversaryProfile(kind=MAC_VIOLATOR, violation_rate=0.5)
        assert not p.seeks_relay_role(0)


class TestShouldDrop:
    def test_no_profile_never_drops(self):
        rng = CountingRng()
        assert not should_drop(None, 0, rng)
        assert rng.calls == 0

    def test_certain_outcomes_spare_the_rng(self):
        rng = CountingRng()
        never = AdversaryProfile(kind=GRAYHOLE, drop_prob=0.0)
        always = AdversaryProfile(kind=BLACKHOLE, drop_prob=1.0)
        assert not should_drop(never, 0, rng)
        assert should_drop(always, 0, rng)
        assert rng.calls == 0

    def test_inactive_profile_spares_the_rng(self):
        rng = CountingRng()
        p = AdversaryProfile(kind=BLACKHOLE, drop_prob=1.0, active_from_us=10**7)
        assert not should_drop(p, 0, rng)
        assert rng.calls == 0

    def test_intermediate_probability_matches_monte_carlo(self):
        p = AdversaryProfile(kind=GRAYHOLE, drop_prob=0.5)
        rng = np.random.default_rng(33)
        hits = sum(should_drop(p, 0, rng) for _ in range(10_000))
        assert hits / 10_000 == pytest.approx(0.5, abs=0.02)


class TestViolations:
    def test_whole_rate_is_deterministic(self):
        p = AdversaryProfile(kind=MAC_VIOLATOR, violation_rate=2.0)
        rng = CountingRng()
        assert violations_this_frame(p, 0, rng) == 2
        assert rng.calls == 0

    def test_fractional_rate_long_run_average(self):
        p = AdversaryProfile(kind=MAC_VIOLATOR, violation_rate=0.5)
        rng = np.random.default_rng(44)
        total = sum(violations_this_frame(p, 0, rng) for _ in range(10_000))
        assert total / 10_000 == pytest.approx(0.5, abs=0.02)

    def test_mixed_rate_long_run_average(self):
        p = AdversaryProfile(kind=MAC_VIOLATOR, violation_rate=1.25)
        rng = np.random.default_rng(45)
        total = sum(violations_this_frame(p, 0, rng) for _ in range(10_000))
        assert total / 10_000 == pytest.approx(1.25, abs=0.03)

    def test_inert_profile_attempts_nothing(self):
        p = AdversaryProfile(kind=MAC_VIOLATOR, violation_rate=0.0)
        assert violations_this_frame(p, 0, CountingRng()) == 0


class TestWatchdog:
    def test_overheard_relay_is_positive(self):
        obs = observe_forwarding(1, 2, 100, overheard=True, could_listen=True, deadline_passed=False)
        assert obs.verdict is Verdict.POSITIVE
        assert (obs.observer, obs.subject, obs.at) == (1, 2, 100)

    def test_missed_deadline_in_range_is_negative(self):
        obs = observe_forwarding(1, 2, 100, overheard=False, could_listen=True, deadline_passed=True)
        assert obs.verdict is Verdict.NEGATIVE

    def test_missed_deadline_out_of_range_is_inconclusive(self):
        obs = observe_forwarding(1, 2, 100, overheard=False, could_listen=False, deadline_passed=True)
        assert obs.verdict is Verdict.INCONCLUSIVE

    def test_pending_deadline_records_nothing(self):
        assert observe_forwarding(1, 2, 100, overheard=False, could_listen=True, deadline_passed=False) is None
        assert observe_forwarding(1, 2, 100, overheard=False, could_listen=False, deadline_passed=False) is None


class TestQuorumDetection:
    def make_tables(self, peer_ids, isolating):
        params = TrustParams()
        tables = {}
        for pid in peer_ids:
            table = TrustTable(params)
            if pid in isolating:
                for step in range(40):
                    table.observe(99, False, step * 1_000_000)
            tables[pid] = table
        return tables

    def test_no_peers_no_flag(self):
        assert detection_status(99, {}) == (False, 0.0)

    def test_quorum_boundary_is_inclusive(self):
        tables = self.make_tables([1, 2, 3, 4], isolating={1, 2})
        flagged, fraction = detection_status(99, tables, quorum=0.5)
        assert fraction == pytest.approx(0.5)
        assert flagged

    def test_below_quorum_not_flagged(self):
        tables = self.make_tables([1, 2, 3, 4], isolating={1})
        flagged, fraction = detection_status(99, tables, quorum=0.5)
        assert fraction == pytest.approx(0.25)
        assert not flagged

    def test_subject_cannot_vote_for_itself(self):
        tables = self.make_tables([1, 2, 99], isolating={1})
        # 99's own table is excluded: one isolating voter among two peers.
        flagged, fraction = detection_status(99, tables, quorum=0.5)
        assert fraction == pytest.approx(0.5)
        assert flagged

    def test_unanimous_quorum(self):
        tables = self.make_tables([1, 2, 3], isolating={1, 2, 3})
        assert detection_status(99, tables) == (True, 1.0)
