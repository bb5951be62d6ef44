"""Four-state radio energy ledger (tx / rx / idle / sleep).

Each node owns a ledger that accrues I * V * t joules against whichever
state the radio occupies.  Accounting is conservative by construction:
residual energy is always `initial - sum(consumed per state)`, and the final
charge before depletion is clamped so the books close exactly at zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .engine import SimTime, US_PER_S


class RadioState(enum.Enum):
    TX = "tx"
    RX = "rx"
    IDLE = "idle"
    SLEEP = "sleep"


@dataclass(frozen=True)
class EnergyParams:
    """Electrical profile; defaults follow a CC2420-class low-power radio."""

    currents_a: dict[str, float] = None  # type: ignore[assignment]
    voltage_v: float = 3.0
    initial_j: float = 100.0

    def __post_init__(self) -> None:
        if self.currents_a is None:
            object.__setattr__(
                self,
                "currents_a",
                {"tx": 0.0174, "rx": 0.0197, "idle": 0.000273, "sleep": 0.000033},
            )

    def power_w(self, state: RadioState) -> float:
        return self.currents_a[state.value] * self.voltage_v


def energy_j(params: EnergyParams, state: RadioState, duration_us: SimTime) -> float:
    """Joules consumed holding `state` for the given duration."""
    return params.power_w(state) * (duration_us / US_PER_S)


@dataclass
class EnergyLedger:
    params: EnergyParams
    state: RadioState = RadioState.IDLE
    since: SimTime = 0
    consumed_j: dict[str, float] = field(default_factory=dict)
    dead_at: SimTime | None = None

    def __post_init__(self) -> None:
        for s in RadioState:
            self.consumed_j.setdefault(s.value, 0.0)

    @property
    def total_consumed_j(self) -> float:
        return sum(self.consumed_j.values())

    @property
    def residual_j(self) -> float:
        return self.params.initial_j - self.total_consumed_j

    @property
    def alive(self) -> bool:
        return self.dead_at is None

    def normalized(self) -> float:
        """Residual as a fraction of the initial budget, in [0, 1]."""
        if self.params.initial_j <= 0:
            return 0.0
        return max(0.0, self.residual_j / self.params.initial_j)

    def charge(self, state: RadioState, duration_us: SimTime, start: SimTime) -> float:
        """Accrue energy for `duration_us` spent in `state` beginning at `start`.

        Returns joules charged.  When the budget cannot cover the whole
        interval only the affordable fraction is charged and the node is
        marked dead at the instant the budget hits zero.
        """
        if self.dead_at is not None or duration_us <= 0:
            return 0.0
        cost = energy_j(self.params, state, duration_us)
        residual = self.residual_j
        if cost >= residual:
            affordable = residual
            frac = affordable / cost if cost > 0 else 0.0
            self.consumed_j[state.value] += affordable
            # Close the books exactly: force residual to zero in one step.
            drift = self.params.initial_j - self.total_consumed_j
            if drift != 0.0:
                self.consumed_j[state.value] += drift
            self.dead_at = start + int(round(duration_us * frac))
            return affordable
        self.consumed_j[state.value] += cost
        return cost

    def transition(self, new_state: RadioState, now: SimTime) -> float:
        """Charge the interval spent in the current state, then switch."""
        if now < self.since:
            raise ValueError(f"transition at {now} before last transition {self.since}")
        charged = self.charge(self.state, now - self.since, self.since)
        self.state = new_state
        self.since = now
        return charged
