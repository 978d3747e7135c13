import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from core.exceptions import (InvalidHamiltonianError, MalformedInputError,
                             OutOfDomainError)
from core.services.linalg import (HERMITIAN_TOL, MAX_DIM, ComplexMatrix,
                                  as_complex_matrix, hermitian_check)

NORM_TOL = 1e-12
DEFICIT_TOL = 1e-15


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class Approximation(NamedTuple):
    value: float
    in_domain: bool


# --- quantum-core ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if amplitudes.ndim != 1 or amplitudes.size < 1:
            raise MalformedInputError("состояние должно быть непустым вектором")
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise OutOfDomainError(f"состояние не нормировано: <psi|psi> = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def basis(cls, dim: int, index: int) -> "QuantumState":
        if not 0 <= index < dim:
            raise MalformedInputError(f"индекс базиса {index} вне размерности {dim}")
        amplitudes = np.zeros(dim, dtype=np.complex128)
        amplitudes[index] = 1.0
        return cls(amplitudes)

    @classmethod
    def from_vector(cls, vector) -> "QuantumState":
        vector = np.asarray(vector, dtype=np.complex128)
        norm = np.linalg.norm(vector)
        if norm == 0 or not np.isfinite(norm):
            raise MalformedInputError("вектор состояния должен быть конечным и ненулевым")
        return cls(vector / norm)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    matrix: ComplexMatrix
    hbar: float = 1.0

    def __post_init__(self):
        matrix = as_complex_matrix(self.matrix)
        if matrix.shape[0] > MAX_DIM:
            raise OutOfDomainError(f"размерность {matrix.shape[0]} больше {MAX_DIM}")
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise OutOfDomainError(f"hbar должно быть положительным, получено {self.hbar!r}")
        if not hermitian_check(matrix, HERMITIAN_TOL):
            raise InvalidHamiltonianError("матрица не эрмитова")
        object.__setattr__(self, "matrix", _frozen(matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    survived: bool
    post_state: QuantumState
    probability: float


# --- zeno-protocols -------------------------------------------------------


@dataclass(frozen=True)
class ZenoSchedule:
    total_time: float
    n: int
    dt: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.total_time) and self.total_time >= 0):
            raise OutOfDomainError(f"полное время должно быть >= 0, получено {self.total_time!r}")
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise OutOfDomainError(f"n должно быть положительным целым, получено {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "dt", self.total_time / self.n)


@dataclass(frozen=True)
class ZenoResult:
    n: int
    exact_survival: float
    taylor_product_survival: Optional[float]
    first_order_survival: Optional[float]
    deficit: float
    tau: float
    unwatched_survival: float


@dataclass(frozen=True)
class EnsembleStatistics:
    trials: int
    survived: int
    frequency: float
    halfwidth: float


# --- classical-switched-oscillator ----------------------------------------


class Interruption(enum.Enum):
    FREEZE_RESTART = "freeze_restart"


@dataclass(frozen=True)
class LCCircuit:
    inductance: float
    capacitance: float
    q0: float

    def __post_init__(self):
        for name in ("inductance", "capacitance"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise OutOfDomainError(f"{name} должно быть положительным, получено {value!r}")
        if not math.isfinite(self.q0):
            raise OutOfDomainError(f"q0 должно быть конечным, получено {self.q0!r}")

    @property
    def omega(self) -> float:
        return 1.0 / math.sqrt(self.inductance * self.capacitance)

    @property
    def tau_classical(self) -> float:
        return math.sqrt(2.0) / self.omega


@dataclass(frozen=True)
class LHOParameters:
    mass: float
    stiffness: float
    x0: float

    def __post_init__(self):
        for name in ("mass", "stiffness"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise OutOfDomainError(f"{name} должно быть положительным, получено {value!r}")

    @property
    def omega(self) -> float:
        return math.sqrt(self.stiffness / self.mass)

    def as_circuit(self) -> LCCircuit:
        # q <-> x, L <-> m, 1/C <-> k
        return LCCircuit(inductance=self.mass, capacitance=1.0 / self.stiffness, q0=self.x0)


@dataclass(frozen=True)
class OscillatorState:
    charge: float
    current: float
    time: float
    switch_on: bool


@dataclass(frozen=True)
class SwitchProtocol:
    total_time: float
    n: int
    interruption: Interruption = Interruption.FREEZE_RESTART

    def __post_init__(self):
        # ZenoSchedule проверяет t и n по тем же правилам
        object.__setattr__(self, "n", self.schedule.n)

    @property
    def schedule(self) -> ZenoSchedule:
        return ZenoSchedule(self.total_time, self.n)

    @property
    def dt(self) -> float:
        return self.total_time / self.n


@dataclass(frozen=True)
class SegmentTrace:
    index: int
    start_time: float
    end_time: float
    charge: float
    current_before_off: float
    energy_before_off: float
    energy_discarded: float


@dataclass(frozen=True)
class SwitchedRun:
    final_state: OscillatorState
    segments: tuple[SegmentTrace, ...]


class TaylorCharge(NamedTuple):
    product_form: float
    # in_domain = False при 1 - (t/τ)²/n < 0
    first_order: Approximation


# --- convergence-lab ------------------------------------------------------


class SystemTag(enum.Enum):
    QUANTUM = "quantum"
    CLASSICAL_LC = "classical_lc"
    CLASSICAL_LHO = "classical_lho"


@dataclass(frozen=True)
class ConvergenceRecord:
    n: int
    value: float
    deficit: float
    system_tag: SystemTag
    exact: Optional[float] = None
    taylor_product: Optional[float] = None
    first_order: Optional[float] = None
    mc_frequency: Optional[float] = None
    mc_halfwidth: Optional[float] = None

    def __post_init__(self):
        if abs(self.deficit - (1.0 - self.value)) > DEFICIT_TOL:
            raise MalformedInputError(
                f"n={self.n}: дефицит {self.deficit!r} не равен 1 - value {self.value!r}"
            )


@dataclass(frozen=True)
class DeficitFit:
    slope: float
    intercept: float
    r_squared: float
    points: int


@dataclass(frozen=True)
class ShortTimeFit:
    tau_estimate: float
    constant_coefficient: float
    linear_coefficient: float
    quadratic_coefficient: float
    quartic_coefficient: float
    residual_rms: float


@dataclass(frozen=True)
class CorrespondenceRow:
    n: int
    quantum_product: float
    classical_product: float
    quantum_exact: float
    classical_exact: float


@dataclass(frozen=True)
class CorrespondenceReport:
    rows: tuple[CorrespondenceRow, ...]
    max_product_discrepancy: float
    max_exact_discrepancy: float


# --- cli ------------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: Optional[int]
    version: str
    argv: list[str]
    outputs: list[str] = field(default_factory=list)
    wall_clock_seconds: float = 0.0
