"""Radio link model: log-distance path loss, Nakagami-m fading, fixed bitrate.

Received power for a transmission over distance d meters is

    rx_dbm = tx_power_dbm - (ref_loss_db + 10 * exponent * log10(d / 1 m))
             + 10 * log10(g)

where g is a unit-mean Gamma-distributed power gain with shape m (the
Nakagami-m power envelope).  A frame is delivered iff rx_dbm clears the
receiver sensitivity.  There is no capture effect: the MAC layer treats any
overlap at a receiver as destroying every overlapping frame, so this module
only answers the single-link question.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import SimTime

MIN_DISTANCE_M = 1.0  # below the reference distance the loss model is flat


@dataclass(frozen=True)
class ChannelParams:
    tx_power_dbm: float = 23.0
    sensitivity_dbm: float = -95.0
    ref_loss_db: float = 40.0
    path_exponent: float = 2.0
    bitrate_bps: int = 8_000_000
    # (distance upper bound in meters, Nakagami shape); None bound = open-ended.
    nakagami_m: tuple[tuple[float | None, float], ...] = ((80.0, 1.5), (None, 0.75))

    def shape_for_distance(self, distance_m: float) -> float:
        for bound, shape in self.nakagami_m:
            if bound is None or distance_m < bound:
                return shape
        return self.nakagami_m[-1][1]


def path_loss_db(params: ChannelParams, distance_m: float) -> float:
    """Log-distance loss relative to a 1 m reference."""
    d = max(distance_m, MIN_DISTANCE_M)
    return params.ref_loss_db + 10.0 * params.path_exponent * math.log10(d)


def fading_gain(params: ChannelParams, distance_m: float, rng: np.random.Generator) -> float:
    """One unit-mean power-gain draw for a link of the given length."""
    m = params.shape_for_distance(distance_m)
    return float(rng.gamma(shape=m, scale=1.0 / m))


def fading_gains(
    params: ChannelParams, distance_m: float, rng: np.random.Generator, n: int
) -> np.ndarray:
    m = params.shape_for_distance(distance_m)
    return rng.gamma(shape=m, scale=1.0 / m, size=n)


@dataclass(slots=True)
class LinkSample:
    distance_m: float
    path_loss_db: float
    fading_gain: float
    rx_power_dbm: float
    delivered: bool


def try_receive(
    params: ChannelParams, distance_m: float, rng: np.random.Generator
) -> LinkSample:
    """Sample one transmission over the link and decide delivery."""
    loss = path_loss_db(params, distance_m)
    gain = fading_gain(params, distance_m, rng)
    rx = params.tx_power_dbm - loss + 10.0 * math.log10(gain) if gain > 0 else -math.inf
    return LinkSample(
        distance_m=distance_m,
        path_loss_db=loss,
        fading_gain=gain,
        rx_power_dbm=float(rx),
        delivered=bool(rx >= params.sensitivity_dbm),
    )


def delivered_with_gain(params: ChannelParams, distance_m: float, gain: float) -> bool:
    """Delivery decision for a pre-drawn fading gain (used for batched draws)."""
    if gain <= 0.0:
        return False
    rx = params.tx_power_dbm - path_loss_db(params, distance_m) + 10.0 * math.log10(gain)
    return bool(rx >= params.sensitivity_dbm)


def sample_delivery_mask(
    params: ChannelParams, distances_m: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized per-receiver delivery decisions for one transmission.

    Draws one fading gain per receiver (shape chosen by each link's length)
    and compares received power against sensitivity.
    """
    d = np.maximum(np.asarray(distances_m, dtype=float), MIN_DISTANCE_M)
    shapes = np.full_like(d, params.nakagami_m[-1][1])
    lower = 0.0
    for bound, shape in params.nakagami_m:
        if bound is None:
            shapes[d >= lower] = shape
        else:
            shapes[(d >= lower) & (d < bound)] = shape
            lower = bound
    gains = rng.gamma(shape=shapes, scale=1.0 / shapes)
    loss = params.ref_loss_db + 10.0 * params.path_exponent * np.log10(d)
    rx = params.tx_power_dbm - loss + 10.0 * np.log10(np.maximum(gains, 1e-300))
    return rx >= params.sensitivity_dbm


def airtime_us(params: ChannelParams, frame_bytes: int) -> SimTime:
    """Transmission duration of a frame at the configured bitrate."""
    return int(round(frame_bytes * 8 / params.bitrate_bps * 1_000_000))


def mean_margin_db(params: ChannelParams, distance_m: float) -> float:
    """Fade margin of the mean received power over sensitivity."""
    return params.tx_power_dbm - path_loss_db(params, distance_m) - params.sensitivity_dbm
