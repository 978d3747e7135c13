"""
Идеальный LC-контур (и механический осциллятор) с мгновенным ключом ON/OFF.

Разрыв цепи обнуляет ток и замораживает заряд на конденсаторе, энергия
L·i²/2 в момент разрыва теряется. Каждый ON-сегмент стартует из покоя,
поэтому заряд за сегмент умножается на cos(ω t/n).
"""

import logging
import math
from dataclasses import replace

import numpy as np

from core.exceptions import NonFiniteStateError, OutOfDomainError
from core.models import (Approximation, LCCircuit, LHOParameters,
                         OscillatorState, SegmentTrace, SwitchedRun,
                         SwitchProtocol, TaylorCharge)
from core.services.protocols import (zeno_survival_first_order,
                                     zeno_survival_taylor)

logger = logging.getLogger(__name__)

SHORT_TIME_LIMIT = 0.5


def initial_state(circuit: LCCircuit) -> OscillatorState:
    return OscillatorState(charge=circuit.q0, current=0.0, time=0.0, switch_on=True)


def stored_energy(state: OscillatorState, circuit: LCCircuit) -> float:
    return (
        state.charge * state.charge / (2.0 * circuit.capacitance)
        + circuit.inductance * state.current * state.current / 2.0
    )


def lc_exact_charge(circuit: LCCircuit, t: float) -> float:
    return circuit.q0 * math.cos(circuit.omega * t)


def lc_short_time_charge(circuit: LCCircuit, t: float) -> Approximation:
    """q0(1 - ω²t²/2) = q0(1 - t²/τ²); вне ωt <= 0.5 помечается как невалидное."""
    ratio = t / circuit.tau_classical
    return Approximation(
        value=circuit.q0 * (1.0 - ratio * ratio),
        in_domain=circuit.omega * abs(t) <= SHORT_TIME_LIMIT,
    )


def switched_charge_exact(circuit: LCCircuit, protocol: SwitchProtocol) -> float:
    x = circuit.omega * protocol.dt
    factor = math.cos(x)
    # cos x = 1 - 2 sin²(x/2)
    half = math.sin(x / 2.0)
    step_loss = 2.0 * half * half
    if factor <= 0 or step_loss >= 1.0:
        return circuit.q0 * factor**protocol.n
    return circuit.q0 * math.exp(protocol.n * math.log1p(-step_loss))


def switched_charge_taylor(circuit: LCCircuit, protocol: SwitchProtocol) -> TaylorCharge:
    schedule = protocol.schedule
    tau = circuit.tau_classical
    first_order = zeno_survival_first_order(tau, schedule)
    return TaylorCharge(
        product_form=circuit.q0 * zeno_survival_taylor(tau, schedule),
        first_order=Approximation(circuit.q0 * first_order.value, first_order.in_domain),
    )


def _derivative(y: np.ndarray, omega_sq: float) -> np.ndarray:
    # q' = i, i' = -q/(LC)
    return np.array([y[1], -omega_sq * y[0]])


def _rk4_step(y: np.ndarray, h: float, omega_sq: float) -> np.ndarray:
    k1 = _derivative(y, omega_sq)
    k2 = _derivative(y + 0.5 * h * k1, omega_sq)
    k3 = _derivative(y + 0.5 * h * k2, omega_sq)
    k4 = _derivative(y + h * k3, omega_sq)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_segment(
    state: OscillatorState,
    circuit: LCCircuit,
    duration: float,
    step: float,
) -> OscillatorState:
    """
    Интегрирует -L q'' = q/C классическим РК4 с фиксированным шагом.

    Последний неполный шаг подбирается так, чтобы попасть ровно в duration.

    Args:
        state: Состояние с замкнутым ключом
        circuit: Параметры контура
        duration: Длительность сегмента, >= 0
        step: Шаг интегрирования, > 0

    Returns:
        OscillatorState: Состояние в конце сегмента
    """
    if not state.switch_on:
        raise OutOfDomainError("нельзя интегрировать при разомкнутом ключе")
    if not step > 0:
        raise OutOfDomainError(f"шаг должен быть положительным, получено {step!r}")
    if not duration >= 0:
        raise OutOfDomainError(f"длительность должна быть >= 0, получено {duration!r}")
    if duration == 0:
        return state

    omega_sq = circuit.omega**2
    y = np.array([state.charge, state.current], dtype=np.float64)
    full_steps = int(duration // step)
    for _ in range(full_steps):
        y = _rk4_step(y, step, omega_sq)
    remainder = duration - full_steps * step
    if remainder > 0:
        y = _rk4_step(y, remainder, omega_sq)

    if not np.all(np.isfinite(y)):
        raise NonFiniteStateError(f"интегрирование разошлось при t={state.time + duration!r}")
    return OscillatorState(
        charge=float(y[0]),
        current=float(y[1]),
        time=state.time + duration,
        switch_on=True,
    )


def apply_switch_off(state: OscillatorState) -> OscillatorState:
    return replace(state, current=0.0, switch_on=False)


def apply_switch_on(state: OscillatorState) -> OscillatorState:
    return replace(state, switch_on=True)


def switched_run_numeric(
    circuit: LCCircuit,
    protocol: SwitchProtocol,
    step: float,
) -> SwitchedRun:
    """
    Протокол прерываний, реализованный интегрированием.

    n раз: ON-сегмент длиной t/n, затем составное событие OFF->ON нулевой
    длительности. Протокол заканчивается в состоянии OFF.
    """
    dt = protocol.dt
    if dt > 0 and step > dt / 10.0:
        raise OutOfDomainError(f"шаг {step!r} больше (t/n)/10 = {dt / 10.0!r}")

    state = initial_state(circuit)
    segments = []
    for index in range(protocol.n):
        state = integrate_segment(state, circuit, dt, step)
        # время сегмента не накапливается суммированием
        state = replace(state, time=(index + 1) * dt)
        energy_before = stored_energy(state, circuit)
        interrupted = apply_switch_off(state)
        segments.append(
            SegmentTrace(
                index=index,
                start_time=index * dt,
                end_time=state.time,
                charge=state.charge,
                current_before_off=state.current,
                energy_before_off=energy_before,
                energy_discarded=energy_before - stored_energy(interrupted, circuit),
            )
        )
        logger.debug("сегмент %d: q=%.17g i=%.17g", index, state.charge, state.current)
        state = interrupted if index == protocol.n - 1 else apply_switch_on(interrupted)

    return SwitchedRun(final_state=state, segments=tuple(segments))


def lho_from_lc(circuit: LCCircuit, mass: float) -> LHOParameters:
    """Механический аналог с той же частотой: k = m ω², x0 = q0."""
    if not mass > 0:
        raise OutOfDomainError(f"масса должна быть положительной, получено {mass!r}")
    return LHOParameters(mass=mass, stiffness=mass * circuit.omega**2, x0=circuit.q0)
