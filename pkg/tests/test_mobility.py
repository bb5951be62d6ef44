"""Waypoint mobility: interpolation, clamping, and uniform sampling."""

from __future__ import annotations

import numpy as np
import pytest

from swarmsim.engine import RngStreams, us_from_s
from swarmsim.mobility import Box, Leg, RandomWaypoint, position_at


def make_leg(start, target, depart_s, arrive_s, pause_until_s=None):
    if pause_until_s is None:
        pause_until_s = arrive_s
    return Leg(
        start=np.asarray(start, dtype=float),
        target=np.asarray(target, dtype=float),
        depart_at=us_from_s(depart_s),
        arrive_at=us_from_s(arrive_s),
        pause_until=us_from_s(pause_until_s),
    )


def make_model(box, speed, pause, seed=3):
    return RandomWaypoint(box, speed, pause, RngStreams(seed).stream("mobility"))


class TestBox:
    def test_as_array(self):
        assert Box(400.0, 400.0, 1000.0).as_array().tolist() == [400.0, 400.0, 1000.0]

    def test_diagonal(self):
        assert Box(3.0, 4.0, 0.0).diagonal == pytest.approx(5.0)


class TestInterpolation:
    def test_midpoint(self):
        leg = make_leg((0, 0, 0), (100, 0, 0), 0.0, 10.0)
        assert position_at(leg, us_from_s(5.0)).tolist() == [50.0, 0.0, 0.0]

    def test_clamps_before_departure(self):
        leg = make_leg((0, 0, 0), (100, 0, 0), 2.0, 10.0)
        assert position_at(leg, 0).tolist() == [0.0, 0.0, 0.0]

    def test_clamps_after_arrival(self):
        leg = make_leg((0, 0, 0), (100, 0, 0), 0.0, 10.0, pause_until_s=12.0)
        assert position_at(leg, us_from_s(11.0)).tolist() == [100.0, 0.0, 0.0]

    def test_three_axis_interpolation(self):
        leg = make_leg((0, 0, 0), (40, 80, 20), 0.0, 4.0)
        assert position_at(leg, us_from_s(1.0)).tolist() == [10.0, 20.0, 5.0]

    def test_interpolation_returns_copies(self):
        leg = make_leg((0, 0, 0), (10, 0, 0), 0.0, 1.0)
        pos = position_at(leg, 0)
        pos[0] = 999.0
        assert leg.start[0] == 0.0


class TestRandomWaypoint:
    def test_fixed_speed_range_draws_that_speed(self):
        model = make_model(Box(100, 100, 100), (5.0, 5.0), (0.0, 0.0))
        assert model.draw_speed() == pytest.approx(5.0)

    def test_degenerate_box_pins_to_origin(self):
        model = make_model(Box(0.0, 0.0, 0.0), (1.0, 2.0), (0.0, 0.0))
        assert model.draw_point().tolist() == [0.0, 0.0, 0.0]

    def test_draw_point_mean_matches_uniform(self):
        model = make_model(Box(400.0, 400.0, 1000.0), (1.0, 2.0), (0.0, 0.0), seed=42)
        pts = np.array([model.draw_point() for _ in range(100_000)])
        assert pts[:, 0].mean() == pytest.approx(200.0, abs=5.0)
        assert pts[:, 1].mean() == pytest.approx(200.0, abs=5.0)
        assert pts[:, 2].mean() == pytest.approx(500.0, abs=5.0)

    def test_positions_stay_inside_box(self):
        box = Box(120.0, 80.0, 40.0)
        model = make_model(box, (2.0, 12.0), (0.0, 1.0), seed=11)
        leg = model.first_leg(model.draw_point(), 0)
        hi = box.as_array()
        for _ in range(200):
            for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
                t = leg.depart_at + int(frac * (leg.pause_until - leg.depart_at))
                pos = position_at(leg, t)
                assert np.all(pos >= 0.0) and np.all(pos <= hi)
            leg = model.next_leg(position_at(leg, leg.pause_until), leg.pause_until)

    def test_legs_advance_in_time(self):
        model = make_model(Box(100, 100, 100), (1.0, 5.0), (0.5, 1.0), seed=9)
        leg = model.next_leg(model.draw_point(), 1000)
        assert leg.depart_at == 1000
        assert leg.arrive_at > leg.depart_at
        assert leg.pause_until > leg.arrive_at

    def test_travel_time_matches_distance_over_speed(self):
        model = make_model(Box(100, 100, 100), (4.0, 4.0), (0.0, 0.0))
        start = np.array([0.0, 0.0, 0.0])
        leg = model.next_leg(start, 0)
        distance = float(np.linalg.norm(leg.target - leg.start))
        assert leg.arrive_at == pytest.approx(distance / 4.0 * 1e6, abs=1.0)

    def test_speed_validation(self):
        rng = RngStreams(1).stream("mobility")
        with pytest.raises(ValueError):
            RandomWaypoint(Box(10, 10, 10), (0.0, 5.0), (0.0, 0.0), rng)
        with pytest.raises(ValueError):
            RandomWaypoint(Box(10, 10, 10), (5.0, 1.0), (0.0, 0.0), rng)

    def test_pause_validation(self):
        rng = RngStreams(1).stream("mobility")
        with pytest.raises(ValueError):
            RandomWaypoint(Box(10, 10, 10), (1.0, 5.0), (-1.0, 0.0), rng)
        with pytest.raises(ValueError):
            RandomWaypoint(Box(10, 10, 10), (1.0, 5.0), (2.0, 1.0), rng)
