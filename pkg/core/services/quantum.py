"""
Алгебра состояний и операторов конечномерной квантовой системы:
унитарная эволюция, проективное измерение выживания, разложение Тейлора.
"""

import logging

import numpy as np

from core.exceptions import (InvalidHamiltonianError, MalformedInputError,
                             OutOfDomainError)
from core.models import Hamiltonian, MeasurementOutcome, QuantumState
from core.services.linalg import ComplexMatrix, eigensystem, hermitian_check

logger = logging.getLogger(__name__)

__all__ = [
    "hermitian_check",
    "rabi_hamiltonian",
    "propagate",
    "taylor_final_state",
    "expectation",
    "hamiltonian_variance",
    "survival_probability",
    "measure_survival",
]

DEGENERATE_TOL = 1e-15
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def rabi_hamiltonian(omega: float, hbar: float = 1.0) -> Hamiltonian:
    """H = (ħΩ/2)σ_x: выживание за шаг dt равно cos²(Ω dt / 2) при любом ħ."""
    return Hamiltonian(matrix=(hbar * omega / 2.0) * SIGMA_X, hbar=hbar)


def _check_dim(state: QuantumState, m: np.ndarray) -> None:
    if m.shape != (state.dim, state.dim):
        raise MalformedInputError(
            f"размерности не совпадают: у состояния {state.dim}, у оператора {m.shape}"
        )


def propagate(state: QuantumState, h: Hamiltonian, dt: float) -> QuantumState:
    """
    Точная эволюция exp(-i H dt / ħ)|state> через спектральное разложение.

    Args:
        state: Нормированное начальное состояние
        h: Эрмитов гамильтониан
        dt: Время эволюции, dt >= 0

    Returns:
        QuantumState: Нормированное конечное состояние
    """
    _check_dim(state, h.matrix)
    if not dt >= 0:
        raise OutOfDomainError(f"dt должно быть >= 0, получено {dt!r}")
    eigenvalues, vectors = eigensystem(h.matrix)
    coefficients = vectors.conj().T @ state.amplitudes
    phases = np.exp(-1j * eigenvalues * dt / h.hbar)
    return QuantumState(vectors @ (phases * coefficients))


def taylor_final_state(state: QuantumState, h: Hamiltonian, dt: float) -> np.ndarray:
    """(I - H²dt²/(2ħ²) - iHdt/ħ)|state>, без перенормировки."""
    _check_dim(state, h.matrix)
    psi = state.amplitudes
    h_psi = h.matrix @ psi
    h2_psi = h.matrix @ h_psi
    x = dt / h.hbar
    return psi - (x * x / 2.0) * h2_psi - 1j * x * h_psi


def expectation(state: QuantumState, m: ComplexMatrix) -> float:
    m = np.asarray(m, dtype=np.complex128)
    _check_dim(state, m)
    value = np.vdot(state.amplitudes, m @ state.amplitudes)
    if abs(value.imag) > 1e-12 * max(1.0, float(np.linalg.norm(m))):
        raise InvalidHamiltonianError(
            f"у среднего мнимая часть {value.imag!r}: оператор не эрмитов"
        )
    return float(value.real)


def hamiltonian_variance(state: QuantumState, h: Hamiltonian) -> float:
    """ΔH² = <H²> - <H>², неотрицательна (округление ниже нуля обрезается)."""
    _check_dim(state, h.matrix)
    h_psi = h.matrix @ state.amplitudes
    mean = float(np.vdot(state.amplitudes, h_psi).real)
    second = float(np.vdot(h_psi, h_psi).real)
    variance = second - mean * mean
    if variance < -1e-12 * max(1.0, second):
        logger.warning("Дисперсия энергии %.3e ниже допуска округления", variance)
    return max(variance, 0.0)


def _split(state: QuantumState, reference: QuantumState) -> tuple[complex, np.ndarray]:
    if state.dim != reference.dim:
        raise MalformedInputError(
            f"размерности не совпадают: {state.dim} и {reference.dim} у опорного состояния"
        )
    overlap = np.vdot(reference.amplitudes, state.amplitudes)
    return overlap, state.amplitudes - overlap * reference.amplitudes


def survival_probability(state: QuantumState, reference: QuantumState) -> tuple[float, float]:
    """
    Возвращает пару (p, 1 - p) для |<reference|state>|².

    Дефицит равен квадрату нормы ортогональной составляющей.
    """
    overlap, orthogonal = _split(state, reference)
    deficit = float(np.vdot(orthogonal, orthogonal).real)
    probability = float(abs(overlap) ** 2)
    return min(max(probability, 0.0), 1.0), min(max(deficit, 0.0), 1.0)


def measure_survival(
    state: QuantumState,
    reference: QuantumState,
    rng: np.random.Generator,
) -> MeasurementOutcome:
    """
    Проективное измерение "не распалась ли система".

    При выживании состояние коллапсирует ровно в reference. При распаде
    возвращается нормированная проекция на ортогональное дополнение.
    Вырожденные случаи (p = 0 или 1 с точностью 1e-15) решаются без
    обращения к генератору.
    """
    probability, _ = survival_probability(state, reference)

    if probability >= 1.0 - DEGENERATE_TOL:
        survived = True
    elif probability <= DEGENERATE_TOL:
        survived = False
    else:
        survived = bool(rng.random() < probability)

    if survived:
        return MeasurementOutcome(survived=True, post_state=reference, probability=probability)

    _, orthogonal = _split(state, reference)
    return MeasurementOutcome(
        survived=False,
        post_state=QuantumState.from_vector(orthogonal),
        probability=probability,
    )
