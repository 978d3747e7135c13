"""
Загрузка входных JSON-файлов: гамильтониан с начальным состоянием
и параметры контура (электрический или механический вариант).
"""

import json
import logging
import math
from pathlib import Path

import numpy as np

from core.exceptions import MalformedInputError
from core.models import (Hamiltonian, LCCircuit, LHOParameters, QuantumState,
                         SystemTag)

logger = logging.getLogger(__name__)


def _read_json(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise MalformedInputError(f"не удалось прочитать {path}: {e.strerror}")
    except UnicodeDecodeError as e:
        raise MalformedInputError(f"{path}: файл не в UTF-8 (байт {e.start})")
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"{path}: некорректный JSON ({e.msg}, строка {e.lineno})")
    if not isinstance(data, dict):
        raise MalformedInputError(f"{path}: на верхнем уровне ожидается JSON-объект")
    return data


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedInputError(f"{where}: ожидается число, получено {value!r}")
    try:
        number = float(value)
    except OverflowError:
        raise MalformedInputError(f"{where}: число вне диапазона float")
    if not math.isfinite(number):
        raise MalformedInputError(f"{where}: ожидается конечное число, получено {value!r}")
    return number


def _complex(entry, where: str) -> complex:
    if not isinstance(entry, list) or len(entry) != 2:
        raise MalformedInputError(f"{where}: ожидается [re, im], получено {entry!r}")
    return complex(_number(entry[0], where), _number(entry[1], where))


def load_hamiltonian(path: Path) -> tuple[Hamiltonian, QuantumState]:
    data = _read_json(path)

    dim = data.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise MalformedInputError(f"{path}: 'dim' должно быть положительным целым")
    hbar = _number(data.get("hbar", 1.0), "hbar")

    rows = data.get("matrix")
    if not isinstance(rows, list) or len(rows) != dim:
        raise MalformedInputError(f"{path}: в 'matrix' должно быть {dim} строк")
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise MalformedInputError(f"{path}: в строке {i} матрицы должно быть {dim} элементов")
        for j, entry in enumerate(row):
            matrix[i, j] = _complex(entry, f"matrix[{i}][{j}]")

    hamiltonian = Hamiltonian(matrix=matrix, hbar=hbar)

    initial = data.get("initial")
    if not isinstance(initial, dict):
        raise MalformedInputError(f"{path}: 'initial' должно быть объектом")
    if "basis_index" in initial:
        index = initial["basis_index"]
        if isinstance(index, bool) or not isinstance(index, int):
            raise MalformedInputError(f"{path}: 'basis_index' должно быть целым")
        state = QuantumState.basis(dim, index)
    elif "vector" in initial:
        vector = initial["vector"]
        if not isinstance(vector, list) or len(vector) != dim:
            raise MalformedInputError(f"{path}: в 'vector' должно быть {dim} элементов")
        amplitudes = np.array(
            [_complex(entry, f"vector[{k}]") for k, entry in enumerate(vector)]
        )
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > 1e-12:
            logger.warning("Начальный вектор имеет норму %.17g, нормируем", norm)
        state = QuantumState.from_vector(amplitudes)
    else:
        raise MalformedInputError(f"{path}: в 'initial' нужен 'basis_index' или 'vector'")

    return hamiltonian, state


def load_circuit(path: Path) -> tuple[LCCircuit, SystemTag]:
    """
    {"L", "C", "q0"} - LC-контур, {"m", "k", "x0"} - механический осциллятор.
    Механический вариант переводится в эквивалентный контур.
    """
    data = _read_json(path)
    if {"L", "C", "q0"} <= data.keys():
        circuit = LCCircuit(
            inductance=_number(data["L"], "L"),
            capacitance=_number(data["C"], "C"),
            q0=_number(data["q0"], "q0"),
        )
        return circuit, SystemTag.CLASSICAL_LC
    if {"m", "k", "x0"} <= data.keys():
        lho = LHOParameters(
            mass=_number(data["m"], "m"),
            stiffness=_number(data["k"], "k"),
            x0=_number(data["x0"], "x0"),
        )
        return lho.as_circuit(), SystemTag.CLASSICAL_LHO
    raise MalformedInputError(f"{path}: ожидаются ключи L, C, q0 или m, k, x0")
