"""Radio energy accounting: draw rates, death clamp, conservation."""

from __future__ import annotations

import pytest

from swarmsim.energy import EnergyLedger, EnergyParams, RadioState, energy_j
from swarmsim.engine import us_from_s


class TestEnergyCost:
    def test_transmit_for_one_second(self):
        # 17.4 mA at 3 V for 1 s.
        assert energy_j(EnergyParams(), RadioState.TX, us_from_s(1.0)) == pytest.approx(0.0522)

    def test_zero_duration_costs_nothing(self):
        assert energy_j(EnergyParams(), RadioState.RX, 0) == 0.0

    def test_state_ordering(self):
        params = EnergyParams()
        dur = us_from_s(1.0)
        costs = [
            energy_j(params, state, dur)
            for state in (RadioState.SLEEP, RadioState.IDLE, RadioState.TX, RadioState.RX)
        ]
        assert costs == sorted(costs)


class TestLedger:
    def test_charge_accumulates_per_state(self):
        led = EnergyLedger(EnergyParams())
        led.charge(RadioState.TX, us_from_s(1.0), 0)
        led.charge(RadioState.RX, us_from_s(2.0), us_from_s(1.0))
        assert led.consumed_j["tx"] == pytest.approx(0.0522)
        assert led.consumed_j["rx"] == pytest.approx(0.1182)
        assert led.total_consumed_j == pytest.approx(0.0522 + 0.1182)

    def test_conservation(self):
        led = EnergyLedger(EnergyParams())
        t = 0
        for state in (RadioState.TX, RadioState.RX, RadioState.IDLE, RadioState.SLEEP):
            led.charge(state, us_from_s(0.37), t)
            t += us_from_s(0.37)
        assert led.total_consumed_j + led.residual_j == pytest.approx(
            EnergyParams().initial_j, abs=1e-12
        )

    def test_death_clamp_closes_books_exactly(self):
        # 10 mJ left cannot fund a 52.2 mJ transmit second: the node dies
        # partway through and the ledger charges only what existed.
        led = EnergyLedger(EnergyParams(initial_j=0.01))
        led.charge(RadioState.TX, us_from_s(1.0), 0)
        assert not led.alive
        assert led.residual_j == 0.0
        assert led.total_consumed_j == pytest.approx(0.01, abs=1e-15)
        assert led.dead_at is not None
        expected_fraction = 0.01 / 0.0522
        assert led.dead_at == pytest.approx(us_from_s(expected_fraction), abs=1.0)

    def test_dead_ledger_ignores_further_charges(self):
        led = EnergyLedger(EnergyParams(initial_j=0.001))
        led.charge(RadioState.TX, us_from_s(1.0), 0)
        consumed = led.total_consumed_j
        led.charge(RadioState.RX, us_from_s(1.0), us_from_s(2.0))
        assert led.total_consumed_j == consumed
        assert led.residual_j == 0.0

    def test_non_positive_duration_charges_nothing(self):
        led = EnergyLedger(EnergyParams())
        assert led.charge(RadioState.TX, 0, 0) == 0.0
        assert led.charge(RadioState.TX, -5, 0) == 0.0
        assert led.total_consumed_j == 0.0

    def test_normalized_levels(self):
        params = EnergyParams(initial_j=100.0)
        led = EnergyLedger(params)
        assert led.normalized() == pytest.approx(1.0)
        # Drain exactly half: 50 J of idle time.
        idle_w = params.power_w(RadioState.IDLE)
        led.charge(RadioState.IDLE, us_from_s(50.0 / idle_w), 0)
        assert led.normalized() == pytest.approx(0.5, abs=1e-6)

    def test_normalized_floor_is_zero(self):
        led = EnergyLedger(EnergyParams(initial_j=0.0001))
        led.charge(RadioState.TX, us_from_s(10.0), 0)
        assert led.normalized() == 0.0

    def test_transition_charges_elapsed_interval(self):
        led = EnergyLedger(EnergyParams())
        led.state = RadioState.IDLE
        led.since = 0
        led.transition(RadioState.TX, us_from_s(2.0))
        assert led.consumed_j["idle"] == pytest.approx(
            energy_j(EnergyParams(), RadioState.IDLE, us_from_s(2.0))
        )
        assert led.state is RadioState.TX
        assert led.since == us_from_s(2.0)

    def test_transition_rejects_time_reversal(self):
        led = EnergyLedger(EnergyParams())
        led.transition(RadioState.TX, 100)
        with pytest.raises(ValueError):
            led.transition(RadioState.RX, 50)
