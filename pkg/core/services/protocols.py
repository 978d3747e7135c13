"""
Протокол многократного прерывания: эволюция на t/n, измерение, и так n раз.
Точная вероятность выживания, тейлоровское произведение, первый порядок
и ансамбль траекторий Монте-Карло.
"""

import logging
import math

import numpy as np

from core.exceptions import OutOfDomainError, StationaryStateError
from core.models import (Approximation, EnsembleStatistics, Hamiltonian,
                         QuantumState, ZenoResult, ZenoSchedule)
from core.services.quantum import (DEGENERATE_TOL, hamiltonian_variance,
                                   propagate, survival_probability)

logger = logging.getLogger(__name__)

STATIONARY_TOL = 1e-14


def _power_of_survival(step_deficit: float, n: int) -> tuple[float, float]:
    """(1 - q)^n и 1 - (1 - q)^n без потери точности при малом q."""
    if step_deficit >= 1.0:
        return 0.0, 1.0
    log_survival = n * math.log1p(-step_deficit)
    return math.exp(log_survival), -math.expm1(log_survival)


def short_time_survival(state: QuantumState, h: Hamiltonian, dt: float) -> Approximation:
    if not dt >= 0:
        raise OutOfDomainError(f"dt должно быть >= 0, получено {dt!r}")
    value = 1.0 - hamiltonian_variance(state, h) * dt * dt / (h.hbar * h.hbar)
    return Approximation(value=value, in_domain=value >= 0)


def characteristic_time(state: QuantumState, h: Hamiltonian) -> float:
    """τ = ħ / ΔH."""
    variance = hamiltonian_variance(state, h)
    scale = float(np.linalg.norm(h.matrix)) ** 2
    if variance <= STATIONARY_TOL * scale:
        raise StationaryStateError("нет времени Зенона: состояние стационарно")
    return h.hbar / math.sqrt(variance)


def zeno_survival_exact(state: QuantumState, h: Hamiltonian, schedule: ZenoSchedule) -> float:
    evolved = propagate(state, h, schedule.dt)
    _, step_deficit = survival_probability(evolved, state)
    survival, _ = _power_of_survival(step_deficit, schedule.n)
    return survival


def zeno_survival_taylor(tau: float, schedule: ZenoSchedule) -> float:
    """
    (1 - (t/(nτ))²)^n.

    Это же выражение описывает заряд прерываемого LC-контура, поэтому
    классическая ветвь вызывает именно эту функцию.
    """
    if not tau > 0:
        raise OutOfDomainError(f"tau должно быть положительным, получено {tau!r}")
    x = schedule.total_time / (schedule.n * tau)
    if x > 1.0:
        raise OutOfDomainError(
            f"t/(n*tau) = {x:.6g} > 1: вне области квадратичного приближения"
        )
    if x == 1.0:
        return 0.0
    return math.exp(schedule.n * math.log1p(-x * x))


def zeno_survival_first_order(tau: float, schedule: ZenoSchedule) -> Approximation:
    if not tau > 0:
        raise OutOfDomainError(f"tau должно быть положительным, получено {tau!r}")
    ratio = schedule.total_time / tau
    value = 1.0 - ratio * ratio / schedule.n
    return Approximation(value=value, in_domain=value >= 0)


def unwatched_survival(state: QuantumState, h: Hamiltonian, t: float) -> float:
    probability, _ = survival_probability(propagate(state, h, t), state)
    return probability


def evaluate_schedule(state: QuantumState, h: Hamiltonian, schedule: ZenoSchedule) -> ZenoResult:
    """
    Все величины протокола для одного n.

    Приближения вне своей области возвращаются как None.
    Для стационарного состояния τ = inf.
    """
    evolved = propagate(state, h, schedule.dt)
    _, step_deficit = survival_probability(evolved, state)
    exact, deficit = _power_of_survival(step_deficit, schedule.n)

    try:
        tau = characteristic_time(state, h)
    except StationaryStateError:
        tau = math.inf

    try:
        taylor = zeno_survival_taylor(tau, schedule)
    except OutOfDomainError as e:
        logger.warning("n=%d: произведение Тейлора пропущено (%s)", schedule.n, e)
        taylor = None

    first_order = zeno_survival_first_order(tau, schedule)
    if not first_order.in_domain:
        logger.warning("n=%d: выживание первого порядка %.6g отрицательно, пропущено",
                       schedule.n, first_order.value)

    return ZenoResult(
        n=schedule.n,
        exact_survival=exact,
        taylor_product_survival=taylor,
        first_order_survival=first_order.value if first_order.in_domain else None,
        deficit=deficit,
        tau=tau,
        unwatched_survival=unwatched_survival(state, h, schedule.total_time),
    )


def simulate_trajectory(
    evolved: QuantumState,
    reference: QuantumState,
    n: int,
    rng: np.random.Generator,
) -> tuple[bool, int]:
    """
    Одна траектория протокола: n измерений выживания.

    После каждого выживания состояние равно reference, поэтому перед каждым
    измерением система находится в одном и том же состоянии evolved.
    Равномерные числа берутся из rng в том же порядке, что и при n
    последовательных вызовах measure_survival. Распад поглощающий.

    Returns:
        tuple: (выжила ли траектория, число выполненных измерений)
    """
    probability, _ = survival_probability(evolved, reference)
    if probability >= 1.0 - DEGENERATE_TOL:
        return True, n
    if probability <= DEGENERATE_TOL:
        return False, 1

    decays = np.flatnonzero(rng.random(n) >= probability)
    if decays.size == 0:
        return True, n
    return False, int(decays[0]) + 1


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def run_trajectories(
    state: QuantumState,
    h: Hamiltonian,
    schedule: ZenoSchedule,
    trials: int,
    seed: int,
    sigmas: float = 4.0,
) -> EnsembleStatistics:
    """
    Ансамбль независимых траекторий Монте-Карло.

    Каждая траектория получает собственный поток (seed, index), поэтому
    результат не зависит от порядка выполнения и числа воркеров.
    """
    if trials < 1:
        raise OutOfDomainError(f"trials должно быть >= 1, получено {trials!r}")
    if seed < 0:
        raise OutOfDomainError(f"seed должно быть >= 0, получено {seed!r}")

    evolved = propagate(state, h, schedule.dt)
    survived = 0
    for index in range(trials):
        ok, _ = simulate_trajectory(evolved, state, schedule.n, trajectory_rng(seed, index))
        survived += ok

    frequency = survived / trials
    halfwidth = sigmas * math.sqrt(frequency * (1.0 - frequency) / trials)
    logger.info("n=%d: выжило траекторий %d из %d (seed=%d)",
                schedule.n, survived, trials, seed)
    return EnsembleStatistics(
        trials=trials, survived=survived, frequency=frequency, halfwidth=halfwidth
    )
