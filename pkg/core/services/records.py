import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional

from core.exceptions import InsufficientDataError, MalformedInputError
from core.models import (ConvergenceRecord, DeficitFit, OscillatorState,
                         ShortTimeFit, SwitchedRun, SystemTag)

RECORD_COLUMNS = (
    "n",
    "system_tag",
    "value",
    "deficit",
    "exact",
    "taylor_product",
    "first_order",
    "mc_frequency",
    "mc_halfwidth",
)
REQUIRED_RECORD_COLUMNS = ("n", "value", "deficit", "system_tag")
TRACE_COLUMNS = ("time", "q", "i", "switch_on")


def format_real(value: Optional[float]) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def _write_rows(path: Path, header: Iterable[str], rows: Iterable[list[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_records(path: Path, records: Iterable[ConvergenceRecord]) -> Path:
    rows = []
    for r in records:
        rows.append(
            [
                str(r.n),
                r.system_tag.value,
                format_real(r.value),
                format_real(r.deficit),
                format_real(r.exact),
                format_real(r.taylor_product),
                format_real(r.first_order),
                format_real(r.mc_frequency),
                format_real(r.mc_halfwidth),
            ]
        )
    return _write_rows(path, RECORD_COLUMNS, rows)


def write_trace(path: Path, start: OscillatorState, run: SwitchedRun) -> Path:
    rows = [[format_real(start.time), format_real(start.charge),
             format_real(start.current), "1"]]
    for segment in run.segments:
        rows.append([format_real(segment.end_time), format_real(segment.charge),
                     format_real(segment.current_before_off), "1"])
    final = run.final_state
    rows.append([format_real(final.time), format_real(final.charge),
                 format_real(final.current), "1" if final.switch_on else "0"])
    return _write_rows(path, TRACE_COLUMNS, rows)


def _open_table(path: Path, required: tuple[str, ...]):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise MalformedInputError(f"не удалось прочитать {path}: {e.strerror}")
    except UnicodeDecodeError as e:
        raise MalformedInputError(f"{path}: файл не в UTF-8 (байт {e.start})")
    reader = csv.DictReader(text.splitlines())
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise MalformedInputError(f"{path}: нет колонок {', '.join(missing)}")
    return reader


def _cell(row: dict, column: str, line: int, optional: bool = False):
    raw = (row.get(column) or "").strip()
    if raw == "" and optional:
        return None
    try:
        value = float(raw)
    except ValueError:
        raise MalformedInputError(f"строка {line}, колонка '{column}': не число ({raw!r})")
    if not math.isfinite(value):
        raise MalformedInputError(f"строка {line}, колонка '{column}': не конечное число ({raw!r})")
    return value


def read_records(path: Path) -> list[ConvergenceRecord]:
    reader = _open_table(path, REQUIRED_RECORD_COLUMNS)
    records = []
    # строка 1 - заголовок
    for line, row in enumerate(reader, start=2):
        raw_n = (row.get("n") or "").strip()
        try:
            n = int(raw_n)
        except ValueError:
            raise MalformedInputError(f"строка {line}, колонка 'n': не целое число ({raw_n!r})")
        try:
            tag = SystemTag((row.get("system_tag") or "").strip())
        except ValueError:
            raise MalformedInputError(
                f"строка {line}, колонка 'system_tag': неизвестная метка {row.get('system_tag')!r}"
            )
        records.append(
            ConvergenceRecord(
                n=n,
                value=_cell(row, "value", line),
                deficit=_cell(row, "deficit", line),
                system_tag=tag,
                exact=_cell(row, "exact", line, optional=True),
                taylor_product=_cell(row, "taylor_product", line, optional=True),
                first_order=_cell(row, "first_order", line, optional=True),
                mc_frequency=_cell(row, "mc_frequency", line, optional=True),
                mc_halfwidth=_cell(row, "mc_halfwidth", line, optional=True),
            )
        )
    return records


def read_short_time_samples(path: Path) -> list[tuple[float, float]]:
    reader = _open_table(path, ("t", "value"))
    return [
        (_cell(row, "t", line), _cell(row, "value", line))
        for line, row in enumerate(reader, start=2)
    ]


def require_records(records: list, path: Path) -> list:
    if not records:
        raise InsufficientDataError(f"{path}: нет строк с данными")
    return records


def fit_report(
    deficit_fit: Optional[DeficitFit] = None,
    short_time_fit: Optional[ShortTimeFit] = None,
) -> dict:
    return {
        "slope": deficit_fit.slope if deficit_fit else None,
        "intercept": deficit_fit.intercept if deficit_fit else None,
        "r_squared": deficit_fit.r_squared if deficit_fit else None,
        "tau_estimate": short_time_fit.tau_estimate if short_time_fit else None,
        "linear_coefficient": short_time_fit.linear_coefficient if short_time_fit else None,
        "residual_rms": short_time_fit.residual_rms if short_time_fit else None,
    }


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
