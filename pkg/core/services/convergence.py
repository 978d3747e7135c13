"""
Проверка признаков эффекта Зенона: скан по n, закон дефицита 1/n, оценка τ
по коротким временам и сопоставление квантовой и классической ветвей.
"""

import logging
import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from core.exceptions import (CorrespondenceError, InsufficientDataError,
                             NotZenoSystemError, OutOfDomainError)
from core.models import (ConvergenceRecord, CorrespondenceReport,
                         CorrespondenceRow, DeficitFit, LCCircuit,
                         QuantumState, ShortTimeFit, SwitchProtocol,
                         SystemTag, ZenoSchedule)
from core.services.oscillator import (switched_charge_exact,
                                      switched_charge_taylor)
from core.services.protocols import zeno_survival_exact, zeno_survival_taylor
from core.services.quantum import rabi_hamiltonian

logger = logging.getLogger(__name__)

VALUE_CEILING = 1.001
MIN_FIT_POINTS = 5
MIN_SHORT_TIME_SAMPLES = 4
LINEAR_GATE = 1e-2
CONSTANT_GATE = 1e-3
SHORT_TIME_WINDOW = 0.3
IDENTITY_TOL = 1e-15


def geometric_n_grid(n_min: int, n_max: int) -> list[int]:
    """Объединение степеней двойки и {1, 2, 5}·10^k в пределах [n_min, n_max]."""
    if n_min < 1 or n_max < n_min:
        raise OutOfDomainError(f"некорректные границы сетки {n_min}:{n_max}")
    values = set()
    power = 1
    while power <= n_max:
        values.add(power)
        power *= 2
    decade = 1
    while decade <= n_max:
        values.update(m * decade for m in (1, 2, 5))
        decade *= 10
    return sorted(v for v in values if n_min <= v <= n_max)


def parse_n_grid(text: str) -> list[int]:
    try:
        if ":" in text:
            low, high = text.split(":")
            return geometric_n_grid(int(low), int(high))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise OutOfDomainError(
            f"не удалось разобрать сетку n {text!r}: используйте '10,100' или '100:100000'"
        )


def scan_n(
    evaluator: Callable[[int], float],
    n_grid: Sequence[int],
    system_tag: SystemTag,
) -> list[ConvergenceRecord]:
    if not n_grid:
        raise OutOfDomainError("сетка n пуста")
    if any(n < 1 for n in n_grid) or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise OutOfDomainError(
            f"сетка n должна строго возрастать и начинаться с n >= 1: {list(n_grid)}"
        )

    records = []
    for n in n_grid:
        value = float(evaluator(n))
        if not math.isfinite(value) or not 0.0 <= value <= VALUE_CEILING:
            raise OutOfDomainError(
                f"скан прерван при n={n}: нормированное значение {value!r} "
                f"вне [0, {VALUE_CEILING}]"
            )
        records.append(
            ConvergenceRecord(n=n, value=value, deficit=1.0 - value, system_tag=system_tag)
        )
        logger.debug("%s n=%d value=%.17g", system_tag.value, n, value)
    return records


def fit_deficit_slope(records: Iterable[ConvergenceRecord], n_min: int) -> DeficitFit:
    """
    МНК-прямая log(deficit) от log(n).

    Для системы с эффектом Зенона наклон равен -1, а свободный член
    стремится к log((t/τ)²).
    """
    window = [r for r in records if r.n >= n_min]
    usable = [r for r in window if r.deficit > 0]
    dropped = len(window) - len(usable)
    if dropped:
        logger.warning("Из фита исключено записей с неположительным дефицитом: %d", dropped)
    if len(usable) < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"нужно не меньше {MIN_FIT_POINTS} записей с n >= {n_min} и дефицитом > 0, "
            f"получено {len(usable)}"
        )

    log_n = np.log([r.n for r in usable])
    log_deficit = np.log([r.deficit for r in usable])
    result = stats.linregress(log_n, log_deficit)
    return DeficitFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=float(result.rvalue**2),
        points=len(usable),
    )


def estimate_tau_short_time(samples: Sequence[tuple[float, float]]) -> ShortTimeFit:
    """
    Проверка квадратичного начала распада: value ≈ a + b·t + c·t² + d·t⁴.

    Квартичный член поглощает ошибку усечения. Отсутствие линейного члена
    проверяется по измеренному b.

    Raises:
        InsufficientDataError: меньше 4 точек
        NotZenoSystemError: линейный член, c >= 0 или |a - 1| > 1e-3
    """
    if len(samples) < MIN_SHORT_TIME_SAMPLES:
        raise InsufficientDataError(
            f"нужно не меньше {MIN_SHORT_TIME_SAMPLES} ранних отсчётов, получено {len(samples)}"
        )
    t = np.array([s[0] for s in samples], dtype=np.float64)
    values = np.array([s[1] for s in samples], dtype=np.float64)
    t_max = float(np.max(np.abs(t)))
    if t_max == 0:
        raise InsufficientDataError("среди ранних отсчётов нужен хотя бы один с t != 0")

    s = t / t_max
    design = np.column_stack([np.ones_like(s), s, s**2, s**4])
    coefficients, *_ = np.linalg.lstsq(design, values, rcond=None)
    residual_rms = float(np.sqrt(np.mean((design @ coefficients - values) ** 2)))
    a = float(coefficients[0])
    b = float(coefficients[1]) / t_max
    c = float(coefficients[2]) / t_max**2
    d = float(coefficients[3]) / t_max**4

    if abs(b) * t_max > LINEAR_GATE * abs(c) * t_max**2:
        raise NotZenoSystemError(
            f"обнаружен линейный коэффициент b={b:.6g}: начало распада не квадратичное"
        )
    if c >= 0:
        raise NotZenoSystemError(f"квадратичный коэффициент c={c:.6g} не отрицателен")
    if abs(a - 1.0) > CONSTANT_GATE:
        raise NotZenoSystemError(f"свободный член a={a:.6g} отличается от 1")

    tau = math.sqrt(-1.0 / c)
    if t_max > 1.01 * SHORT_TIME_WINDOW * tau:
        logger.warning("Отсчёты доходят до t=%.3g, дальше квадратичного окна %.3g",
                       t_max, SHORT_TIME_WINDOW * tau)
    return ShortTimeFit(
        tau_estimate=tau,
        constant_coefficient=a,
        linear_coefficient=b,
        quadratic_coefficient=c,
        quartic_coefficient=d,
        residual_rms=residual_rms,
    )


def short_time_samples(
    fn: Callable[[float], float],
    tau: float,
    count: int = 10,
) -> list[tuple[float, float]]:
    window = SHORT_TIME_WINDOW * tau
    return [(window * k / count, float(fn(window * k / count))) for k in range(1, count + 1)]


def correspondence_check(
    tau_q: float,
    tau_c: float,
    t: float,
    n_grid: Sequence[int],
) -> CorrespondenceReport:
    """
    Сравнивает квантовую и классическую ветви на одной сетке n.

    Тейлоровские произведения при tau_q == tau_c обязаны совпадать до 1e-15.
    Точные формы (cos^2n против cos^n) только сообщаются.
    """
    reference = QuantumState.basis(2, 0)
    rabi = rabi_hamiltonian(omega=2.0 / tau_q)
    circuit = LCCircuit(inductance=1.0, capacitance=tau_c * tau_c / 2.0, q0=1.0)

    rows = []
    for n in n_grid:
        schedule = ZenoSchedule(t, n)
        protocol = SwitchProtocol(t, n)
        try:
            quantum_product = zeno_survival_taylor(tau_q, schedule)
            classical_product = switched_charge_taylor(circuit, protocol).product_form
        except OutOfDomainError as e:
            logger.warning("n=%d пропущено при сверке ветвей (%s)", n, e)
            continue
        rows.append(
            CorrespondenceRow(
                n=n,
                quantum_product=quantum_product,
                classical_product=classical_product,
                quantum_exact=zeno_survival_exact(reference, rabi, schedule),
                classical_exact=switched_charge_exact(circuit, protocol),
            )
        )

    max_product = max((abs(r.quantum_product - r.classical_product) for r in rows), default=0.0)
    max_exact = max((abs(r.quantum_exact - r.classical_exact) for r in rows), default=0.0)
    if tau_q == tau_c and max_product > IDENTITY_TOL:
        raise CorrespondenceError(
            f"произведения Тейлора расходятся на {max_product:.3e} при равных tau"
        )
    return CorrespondenceReport(
        rows=tuple(rows),
        max_product_discrepancy=max_product,
        max_exact_discrepancy=max_exact,
    )
