"""Scenario parsing: defaults, strict validation, canonical digests."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from swarmsim.scenario import (
    Scenario,
    ScenarioError,
    load_scenario,
    parse_scenario,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


class TestDefaults:
    def test_empty_dict_materializes_defaults(self):
        sc = parse_scenario({}, name="empty")
        assert sc.name == "empty"
        assert sc.node_count == 100
        assert (sc.area.x, sc.area.y, sc.area.z) == (400.0, 400.0, 1000.0)
        assert sc.duration_s == 120.0
        assert sc.seed == 1
        assert sc.trust_enabled
        assert sc.adversary == []

    def test_protocol_defaults(self):
        sc = parse_scenario({})
        assert sc.superframe.frame_us == 100_000
        assert sc.superframe.cw_min == 32
        assert sc.superframe.cw_max == 256
        assert sc.traffic.payload_bytes == 256
        assert sc.traffic.period_superframes == 3
        assert sc.trust.params.isolation_threshold == 0.4
        assert sc.trust.params.delta_beta == 2.0
        assert sc.trust.quorum == 0.5
        assert sc.channel.bitrate_bps == 8_000_000
        assert sc.clustering.reelection_period_s == 30.0
        assert sc.detection.horizon_fraction == 0.5

    def test_duration_us_property(self):
        assert parse_scenario({"duration_s": 2.5}).duration_us == 2_500_000


class TestOverrides:
    def test_nested_override(self):
        sc = parse_scenario({"trust": {"delta_beta": 3.0}})
        assert sc.trust.params.delta_beta == 3.0
        assert sc.trust.params.delta_alpha == 1.0

    def test_superframe_milliseconds_to_microseconds(self):
        sc = parse_scenario({"superframe": {"scheduled_ms": 30.0}})
        assert sc.superframe.scheduled_us == 30_000

    def test_adversary_group(self):
        sc = parse_scenario(
            {
                "adversary": [
                    {"kind": "blackhole", "fraction": 0.2, "score_inflation": 1.0}
                ]
            }
        )
        assert len(sc.adversary) == 1
        group = sc.adversary[0]
        assert group.profile.kind == "blackhole"
        assert group.profile.drop_prob == 1.0  # blackholes default to total loss
        assert group.resolve_count(100) == 20

    def test_adversary_count_beats_fraction(self):
        sc = parse_scenario({"adversary": [{"kind": "grayhole", "count": 7, "drop_prob": 0.5}]})
        assert sc.adversary[0].resolve_count(100) == 7


class TestStrictValidation:
    def test_unknown_top_level_key(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario({"node_cout": 50})
        assert any("node_cout: unknown key" in p for p in exc.value.problems)

    def test_unknown_nested_key_has_full_path(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario({"trust": {"delta_betas": 3.0}})
        assert any("trust.delta_betas: unknown key" in p for p in exc.value.problems)

    def test_type_mismatch_reports_value(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario({"node_count": "many"})
        assert any("node_count" in p and "'many'" in p for p in exc.value.problems)

    def test_problems_are_collected_not_first_only(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario({"node_count": "many", "duration_s": -1, "bogus": 1})
        assert len(exc.value.problems) >= 3

    def test_non_dict_top_level(self):
        with pytest.raises(ScenarioError):
            parse_scenario([1, 2, 3])

    def test_bool_is_not_a_number(self):
        with pytest.raises(ScenarioError):
            parse_scenario({"duration_s": True})

    def test_bad_stop_rule(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario({"stop_rule": "forever"})
        assert any("stop_rule" in p for p in exc.value.problems)

    def test_bad_adversary_kind(self):
        with pytest.raises(ScenarioError):
            parse_scenario({"adversary": [{"kind": "wormhole"}]})


class TestDigest:
    def test_digest_is_stable(self):
        a = parse_scenario({"seed": 9}).digest()
        b = parse_scenario({"seed": 9}).digest()
        assert a == b
        assert len(a) == 64

    def test_digest_ignores_key_order(self):
        a = parse_scenario({"seed": 9, "duration_s": 10.0})
        b = parse_scenario({"duration_s": 10.0, "seed": 9})
        assert a.digest() == b.digest()

    def test_digest_tracks_content(self):
        assert parse_scenario({"seed": 1}).digest() != parse_scenario({"seed": 2}).digest()
        assert (
            parse_scenario({"trust": {"quorum": 0.5}}).digest()
            != parse_scenario({"trust": {"quorum": 0.6}}).digest()
        )

    def test_effective_dict_is_json_round_trippable(self):
        sc = parse_scenario({"adversary": [{"kind": "blackhole", "fraction": 0.2}]})
        blob = json.dumps(sc.effective_dict(), sort_keys=True)
        assert json.loads(blob) == sc.effective_dict()


class TestShippedScenarios:
    def test_benign_100_loads(self):
        sc = load_scenario(SCENARIO_DIR / "benign-100.json")
        assert sc.node_count == 100
        assert sc.duration_s == 120.0
        assert sc.trust_enabled
        assert sc.adversary == []

    def test_attack_100_loads(self):
        sc = load_scenario(SCENARIO_DIR / "attack-100.json")
        assert sc.node_count == 100
        assert len(sc.adversary) == 1
        group = sc.adversary[0]
        assert group.profile.kind == "blackhole"
        assert group.profile.drop_prob == 1.0
        assert group.resolve_count(sc.node_count) == 20

    def test_scenario_type(self):
        assert isinstance(load_scenario(SCENARIO_DIR / "benign-100.json"), Scenario)
