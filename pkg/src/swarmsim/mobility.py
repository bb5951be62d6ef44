"""Random-waypoint mobility in a 3-D box with lazy position interpolation.

A node repeatedly draws a uniform target inside the box, flies to it in a
straight line at a uniformly drawn speed, pauses, and repeats.  Positions
are never ticked; `position_at` interpolates along the current leg, so a
node only costs work when a leg ends or somebody asks where it is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import SimTime, US_PER_S


@dataclass(frozen=True, slots=True)
class Box:
    """Axis-aligned flight volume anchored at the origin, in meters."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def diagonal(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))


@dataclass(slots=True)
class Leg:
    """One straight flight segment plus the pause at its end."""

    start: np.ndarray
    target: np.ndarray
    depart_at: SimTime
    arrive_at: SimTime
    pause_until: SimTime


class RandomWaypoint:
    """Per-node waypoint process; all draws come from the shared mobility stream."""

    def __init__(
        self,
        box: Box,
        speed_range: tuple[float, float],
        pause_range: tuple[float, float],
        rng: np.random.Generator,
    ) -> None:
        v_lo, v_hi = speed_range
        if v_lo <= 0 or v_hi < v_lo:
            raise ValueError(f"speed range must satisfy 0 < lo <= hi, got {speed_range}")
        p_lo, p_hi = pause_range
        if p_lo < 0 or p_hi < p_lo:
            raise ValueError(f"pause range must satisfy 0 <= lo <= hi, got {pause_range}")
        self.box = box
        self.speed_range = speed_range
        self.pause_range = pause_range
        self.rng = rng

    def draw_point(self) -> np.ndarray:
        return self.rng.uniform(0.0, 1.0, size=3) * self.box.as_array()

    def draw_speed(self) -> float:
        v_lo, v_hi = self.speed_range
        if v_lo == v_hi:
            return v_lo
        return float(self.rng.uniform(v_lo, v_hi))

    def draw_pause_us(self) -> SimTime:
        p_lo, p_hi = self.pause_range
        pause = p_lo if p_lo == p_hi else float(self.rng.uniform(p_lo, p_hi))
        return int(round(pause * US_PER_S))

    def first_leg(self, start: np.ndarray, now: SimTime) -> Leg:
        return self.next_leg(start, now)

    def next_leg(self, start: np.ndarray, now: SimTime) -> Leg:
        """Draw the next target/speed/pause and return the resulting leg."""
        target = self.draw_point()
        speed = self.draw_speed()
        distance = float(np.linalg.norm(target - start))
        travel_us = int(round(distance / speed * US_PER_S))
        arrive = now + travel_us
        return Leg(
            start=start.copy(),
            target=target,
            depart_at=now,
            arrive_at=arrive,
            pause_until=arrive + self.draw_pause_us(),
        )


def position_at(leg: Leg, t: SimTime) -> np.ndarray:
    """Linear interpolation along a leg; clamps to endpoints outside it."""
    if t <= leg.depart_at:
        return leg.start.copy()
    if t >= leg.arrive_at:
        return leg.target.copy()
    frac = (t - leg.depart_at) / (leg.arrive_at - leg.depart_at)
    return leg.start + frac * (leg.target - leg.start)
