"""Shared fixtures and scenario builders for the test suite."""

from __future__ import annotations

import copy

import pytest

from swarmsim.scenario import Scenario, parse_scenario

# A small, dense swarm that finishes a run in well under a second.  Most
# integration tests want exactly this shape and override one or two keys.
SMALL_SCENARIO = {
    "name": "small",
    "seed": 7,
    "duration_s": 15.0,
    "area_m": [150.0, 150.0, 50.0],
    "node_count": 12,
    "trust_enabled": True,
    "crypto_backend": "modeled",
}


def build_scenario(overrides: dict | None = None, **top_level) -> Scenario:
    """Parse SMALL_SCENARIO with optional nested overrides merged in."""
    data = copy.deepcopy(SMALL_SCENARIO)
    if overrides:
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key].update(value)
            else:
                data[key] = value
    data.update(top_level)
    return parse_scenario(data, name=str(data.get("name", "test")))


@pytest.fixture
def small_scenario() -> Scenario:
    return build_scenario()
