import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from core.exceptions import NonFiniteStateError, OutOfDomainError
from core.models import (LCCircuit, LHOParameters, OscillatorState,
                         SwitchProtocol)
from core.services.oscillator import (apply_switch_off, apply_switch_on,
                                      initial_state, integrate_segment,
                                      lc_exact_charge, lc_short_time_charge,
                                      lho_from_lc, stored_energy,
                                      switched_charge_exact,
                                      switched_charge_taylor,
                                      switched_run_numeric)


class TestCircuit:
    @pytest.mark.parametrize("L,C", [(0.0, 1.0), (1.0, -2.0), (math.nan, 1.0)])
    def test_rejects_non_positive(self, L, C):
        with pytest.raises(OutOfDomainError):
            LCCircuit(inductance=L, capacitance=C, q0=1.0)

    def test_tau_classical(self):
        circuit = LCCircuit(inductance=2.0, capacitance=0.5, q0=1.0)
        assert circuit.omega == pytest.approx(1.0)
        assert circuit.tau_classical == pytest.approx(math.sqrt(2))


class TestFreeOscillation:
    def test_initial_charge(self, unit_circuit):
        assert lc_exact_charge(unit_circuit, 0.0) == 1.0

    def test_quarter_period(self, unit_circuit):
        assert lc_exact_charge(unit_circuit, math.pi / 2) == pytest.approx(0.0, abs=1e-15)

    def test_cosine(self, unit_circuit):
        assert lc_exact_charge(unit_circuit, 0.25) == pytest.approx(0.968912, abs=1e-6)

    def test_short_time(self, unit_circuit):
        value, in_domain = lc_short_time_charge(unit_circuit, 0.25)
        assert value == pytest.approx(0.96875, abs=1e-15)
        assert in_domain

    def test_short_time_root_is_tau(self, unit_circuit):
        value, in_domain = lc_short_time_charge(unit_circuit, unit_circuit.tau_classical)
        assert value == pytest.approx(0.0, abs=1e-15)
        assert not in_domain

    def test_short_time_at_zero(self, unit_circuit):
        assert lc_short_time_charge(unit_circuit, 0.0).value == 1.0


class TestSwitchedCharge:
    def test_single_quarter_period(self, unit_circuit):
        protocol = SwitchProtocol(math.pi / 2, 1)
        assert switched_charge_exact(unit_circuit, protocol) == pytest.approx(0.0, abs=1e-15)

    def test_four_segments(self, unit_circuit):
        value = switched_charge_exact(unit_circuit, SwitchProtocol(1.0, 4))
        assert value == pytest.approx(math.cos(0.25) ** 4, rel=1e-14)
        assert value == pytest.approx(0.881329, abs=1e-6)

    def test_frequent_switching_freezes(self, unit_circuit):
        n = 10**6
        value = switched_charge_exact(unit_circuit, SwitchProtocol(1.0, n))
        assert value >= 1 - 1.01 * 0.5 / n

    def test_deficit_scales_with_n(self, unit_circuit):
        n = 10**5
        deficit = 1 - switched_charge_exact(unit_circuit, SwitchProtocol(1.0, n))
        assert n * deficit == pytest.approx(0.5, rel=0.01)

    def test_negative_factor(self, unit_circuit):
        value = switched_charge_exact(unit_circuit, SwitchProtocol(3.0, 1))
        assert value == pytest.approx(math.cos(3.0), rel=1e-14)

    def test_scales_with_initial_charge(self):
        circuit = LCCircuit(inductance=1.0, capacitance=1.0, q0=-2.5)
        value = switched_charge_exact(circuit, SwitchProtocol(1.0, 4))
        assert value == pytest.approx(-2.5 * math.cos(0.25) ** 4, rel=1e-14)

    def test_taylor(self, unit_circuit):
        product, first_order = switched_charge_taylor(unit_circuit, SwitchProtocol(1.0, 4))
        assert product == pytest.approx((1 - 1 / 32) ** 4, rel=1e-14)
        assert product == pytest.approx(0.880678, abs=1e-6)
        assert first_order.value == pytest.approx(0.875, abs=1e-15)
        assert first_order.in_domain

    def test_taylor_zero_time(self):
        circuit = LCCircuit(inductance=1.0, capacitance=1.0, q0=3.0)
        assert switched_charge_taylor(circuit, SwitchProtocol(0.0, 5)) == (3.0, (3.0, True))

    def test_taylor_large_n(self, unit_circuit):
        product, first_order = switched_charge_taylor(unit_circuit, SwitchProtocol(1.0, 10**7))
        assert product == pytest.approx(1.0, abs=1e-7)
        assert first_order.value == pytest.approx(1.0, abs=1e-7)

    def test_negative_first_order_is_flagged(self, unit_circuit):
        # t/(nτ) = 0.9 при n = 4: произведение ещё в области, первый порядок уже нет
        t = 0.9 * 4 * unit_circuit.tau_classical
        product, first_order = switched_charge_taylor(unit_circuit, SwitchProtocol(t, 4))
        assert product == pytest.approx(0.19**4, rel=1e-12)
        assert first_order.value == pytest.approx(-2.24, rel=1e-12)
        assert not first_order.in_domain

    def test_flag_ignores_sign_of_initial_charge(self):
        circuit = LCCircuit(inductance=1.0, capacitance=1.0, q0=-2.0)
        t = 0.9 * 4 * circuit.tau_classical
        _, first_order = switched_charge_taylor(circuit, SwitchProtocol(t, 4))
        assert first_order.value == pytest.approx(4.48, rel=1e-12)
        assert not first_order.in_domain

    def test_product_outside_domain(self, unit_circuit):
        t = 1.1 * 4 * unit_circuit.tau_classical
        with pytest.raises(OutOfDomainError):
            switched_charge_taylor(unit_circuit, SwitchProtocol(t, 4))

    def test_product_gap_shrinks_as_cube(self, unit_circuit):
        grid = [100, 200, 400, 800]
        gaps = [
            switched_charge_exact(unit_circuit, SwitchProtocol(1.0, n))
            - switched_charge_taylor(unit_circuit, SwitchProtocol(1.0, n)).product_form
            for n in grid
        ]
        assert all(gap > 0 for gap in gaps)
        slope = stats.linregress(np.log(grid), np.log(gaps)).slope
        assert slope <= -2.8


class TestIntegrateSegment:
    def test_matches_analytic_solution(self, unit_circuit):
        state = integrate_segment(initial_state(unit_circuit), unit_circuit, 0.25, 1e-4)
        assert state.charge == pytest.approx(math.cos(0.25), abs=1e-10)
        assert state.current == pytest.approx(-math.sin(0.25), abs=1e-10)
        assert state.time == 0.25
        assert state.switch_on

    def test_zero_duration(self, unit_circuit):
        start = initial_state(unit_circuit)
        assert integrate_segment(start, unit_circuit, 0.0, 1e-4) == start

    def test_fourth_order_convergence(self, unit_circuit):
        start = initial_state(unit_circuit)
        errors = []
        for step in (0.05, 0.025):
            state = integrate_segment(start, unit_circuit, 2.0, step)
            errors.append(abs(state.charge - math.cos(2.0)))
        assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.2)

    def test_energy_conserved(self):
        circuit = LCCircuit(inductance=0.7, capacitance=1.3, q0=0.9)
        start = initial_state(circuit)
        state = integrate_segment(start, circuit, 1.5, 1e-4)
        assert stored_energy(state, circuit) == pytest.approx(
            stored_energy(start, circuit), rel=1e-10
        )

    def test_switch_off_rejected(self, unit_circuit):
        with pytest.raises(OutOfDomainError):
            integrate_segment(apply_switch_off(initial_state(unit_circuit)), unit_circuit, 1.0, 1e-3)

    def test_non_positive_step(self, unit_circuit):
        with pytest.raises(OutOfDomainError):
            integrate_segment(initial_state(unit_circuit), unit_circuit, 1.0, 0.0)

    def test_divergence(self, unit_circuit):
        huge = OscillatorState(charge=1e308, current=1e308, time=0.0, switch_on=True)
        with pytest.raises(NonFiniteStateError):
            integrate_segment(huge, unit_circuit, 1.0, 0.5)


class TestSwitchEvents:
    def test_switch_off(self):
        state = OscillatorState(charge=0.5, current=0.3, time=1.0, switch_on=True)
        off = apply_switch_off(state)
        assert (off.charge, off.current, off.switch_on) == (0.5, 0.0, False)

    def test_switch_off_idempotent(self):
        state = OscillatorState(charge=0.5, current=0.3, time=1.0, switch_on=True)
        assert apply_switch_off(apply_switch_off(state)) == apply_switch_off(state)

    def test_all_energy_discarded(self, unit_circuit):
        state = OscillatorState(charge=0.0, current=1.0, time=0.0, switch_on=True)
        off = apply_switch_off(state)
        assert (off.charge, off.current) == (0.0, 0.0)
        assert stored_energy(off, unit_circuit) == 0.0

    def test_switch_on_keeps_charge(self):
        off = OscillatorState(charge=0.4, current=0.0, time=2.0, switch_on=False)
        on = apply_switch_on(off)
        assert (on.charge, on.current, on.switch_on) == (0.4, 0.0, True)


class TestSwitchedRun:
    def test_matches_analytic(self, unit_circuit):
        run = switched_run_numeric(unit_circuit, SwitchProtocol(1.0, 4), 1e-4)
        assert run.final_state.charge == pytest.approx(math.cos(0.25) ** 4, abs=1e-8)
        assert run.final_state.current == 0.0
        assert not run.final_state.switch_on
        assert run.final_state.time == 1.0

    def test_segments(self, unit_circuit):
        run = switched_run_numeric(unit_circuit, SwitchProtocol(1.0, 4), 1e-4)
        assert [s.index for s in run.segments] == [0, 1, 2, 3]
        assert [s.end_time for s in run.segments] == [0.25, 0.5, 0.75, 1.0]
        for k, segment in enumerate(run.segments, start=1):
            assert segment.charge == pytest.approx(math.cos(0.25) ** k, abs=1e-9)
            inductive = segment.current_before_off**2 / 2
            assert segment.energy_discarded == pytest.approx(inductive, rel=1e-12)

    def test_charge_frozen_across_interruptions(self, unit_circuit):
        run = switched_run_numeric(unit_circuit, SwitchProtocol(1.0, 4), 1e-4)
        assert run.final_state.charge == run.segments[-1].charge

    def test_step_too_large(self, unit_circuit):
        with pytest.raises(OutOfDomainError):
            switched_run_numeric(unit_circuit, SwitchProtocol(1.0, 4), 0.05)

    def test_zero_time(self, unit_circuit):
        run = switched_run_numeric(unit_circuit, SwitchProtocol(0.0, 3), 1e-4)
        assert run.final_state.charge == 1.0

    @pytest.mark.parametrize("n", [1, 4, 16, 64])
    @pytest.mark.parametrize("t", [0.5, 1.0])
    @pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
    def test_numeric_agrees_with_analytic(self, omega, t, n):
        circuit = LCCircuit(inductance=1.0, capacitance=1.0 / omega**2, q0=0.7)
        protocol = SwitchProtocol(t, n)
        run = switched_run_numeric(circuit, protocol, 1e-4)
        expected = switched_charge_exact(circuit, protocol)
        assert abs(run.final_state.charge - expected) <= 1e-8 * abs(circuit.q0)


class TestMechanicalAnalogue:
    def test_unit(self, unit_circuit):
        lho = lho_from_lc(unit_circuit, mass=1.0)
        assert (lho.mass, lho.stiffness, lho.x0) == (1.0, pytest.approx(1.0), 1.0)

    def test_stiffness(self):
        lho = lho_from_lc(LCCircuit(inductance=2.0, capacitance=0.5, q0=1.0), mass=3.0)
        assert lho.stiffness == pytest.approx(3.0)

    def test_non_positive_mass(self, unit_circuit):
        with pytest.raises(OutOfDomainError):
            lho_from_lc(unit_circuit, mass=0.0)

    def test_same_trajectory_after_relabeling(self):
        circuit = LCCircuit(inductance=2.0, capacitance=0.5, q0=0.8)
        mechanical = lho_from_lc(circuit, mass=3.0).as_circuit()
        protocol = SwitchProtocol(1.0, 4)
        assert switched_charge_exact(mechanical, protocol) == pytest.approx(
            switched_charge_exact(circuit, protocol), rel=1e-14
        )

    def test_as_circuit(self):
        circuit = LHOParameters(mass=2.0, stiffness=8.0, x0=0.1).as_circuit()
        assert (circuit.inductance, circuit.capacitance, circuit.q0) == (2.0, 0.125, 0.1)
        assert circuit.omega == pytest.approx(2.0)


@settings(max_examples=1000, deadline=None)
@given(
    omega=st.floats(min_value=0.1, max_value=10.0, allow_nan=False),
    fraction=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    n=st.integers(min_value=1, max_value=10_000),
)
def test_charge_approximations_are_ordered(omega, fraction, n):
    circuit = LCCircuit(inductance=1.0, capacitance=1.0 / omega**2, q0=1.0)
    protocol = SwitchProtocol(fraction * circuit.tau_classical / 2, n)
    exact = switched_charge_exact(circuit, protocol)
    product, first_order = switched_charge_taylor(circuit, protocol)
    assert exact >= product - 1e-12
    assert product >= first_order.value - 1e-12
    assert first_order.in_domain
