import logging

import numpy as np
import pytest

from core.models import LCCircuit, QuantumState
from core.services.quantum import rabi_hamiltonian


@pytest.fixture(autouse=True)
def core_log_propagation(monkeypatch):
    # логгер "core" не пропускает записи к root, где их ловит caplog
    monkeypatch.setattr(logging.getLogger("core"), "propagate", True)


@pytest.fixture
def ground():
    return QuantumState.basis(2, 0)


@pytest.fixture
def rabi_pi():
    # Ω = π: τ = 2/π, выживание за шаг cos²(π dt / 2)
    return rabi_hamiltonian(np.pi)


@pytest.fixture
def unit_circuit():
    return LCCircuit(inductance=1.0, capacitance=1.0, q0=1.0)


@pytest.fixture
def output_dir(settings, tmp_path):
    settings.ZENO_OUTPUT_DIR = tmp_path / "runs"
    return settings.ZENO_OUTPUT_DIR


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2.0


def random_state(rng: np.random.Generator, dim: int) -> QuantumState:
    return QuantumState.from_vector(rng.normal(size=dim) + 1j * rng.normal(size=dim))
