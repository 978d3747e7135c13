import logging

import numpy as np
import numpy.typing as npt
from scipy import linalg as la

from core.exceptions import InvalidHamiltonianError, MalformedInputError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-12
GRAM_TOL = 1e-12
MAX_DIM = 64


def as_complex_matrix(entries) -> ComplexMatrix:
    matrix = np.array(entries, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise MalformedInputError(f"ожидается квадратная матрица, получена форма {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise MalformedInputError("в матрице есть неконечные элементы")
    return matrix


def hermitian_check(m: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    """
    Проверяет эрмитовость: max |m - m^H| <= tol * ||m||.

    Args:
        m: Квадратная комплексная матрица
        tol: Относительный допуск

    Returns:
        bool: True если матрица эрмитова в пределах допуска
    """
    m = np.asarray(m, dtype=np.complex128)
    deviation = np.max(np.abs(m - m.conj().T))
    return bool(deviation <= tol * np.linalg.norm(m))


def eigensystem(m: ComplexMatrix) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """
    Спектральное разложение эрмитовой матрицы.

    Собственный базис переортонормируется, если отклонение матрицы Грама
    от единичной превышает GRAM_TOL.
    """
    try:
        eigenvalues, vectors = la.eigh(m)
    except (la.LinAlgError, ValueError) as e:
        raise InvalidHamiltonianError(f"спектральное разложение не удалось: {e}")

    gram = vectors.conj().T @ vectors
    deviation = np.max(np.abs(gram - np.eye(len(eigenvalues))))
    if deviation > GRAM_TOL:
        logger.warning("Переортонормируем собственный базис (отклонение Грама %.3e)", deviation)
        q, r = np.linalg.qr(vectors)
        phases = np.diag(r) / np.abs(np.diag(r))
        vectors = q * phases
    return eigenvalues, vectors
