"""
Статический SVG-график value/deficit от n без внешних зависимостей.
Вывод детерминирован: одинаковые записи дают побайтно одинаковый файл.
"""

import logging
import math
from typing import Optional, Sequence

from core.exceptions import InsufficientDataError
from core.models import ConvergenceRecord

logger = logging.getLogger(__name__)

WIDTH = 800
HEIGHT = 600
PAD = 70


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _scale(value: float, low: float, high: float, start: float, end: float) -> float:
    span = high - low
    if span <= 0:
        return (start + end) / 2.0
    return start + (value - low) / span * (end - start)


def render_chart(
    records: Sequence[ConvergenceRecord],
    y_field: str = "value",
    log_log: bool = False,
    annotation: Optional[str] = None,
) -> str:
    points = []
    for r in records:
        x, y = float(r.n), float(getattr(r, y_field))
        if log_log:
            if x <= 0 or y <= 0:
                continue
            x, y = math.log10(x), math.log10(y)
        points.append((x, y))
    skipped = len(records) - len(points)
    if skipped:
        logger.warning("Пропущено точек: %d (не изображаются на логарифмических осях)", skipped)
    if not points:
        raise InsufficientDataError("нет точек для графика")

    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_low, x_high = min(xs), max(xs)
    y_low, y_high = min(ys), max(ys)

    pixels = [
        (
            _scale(x, x_low, x_high, PAD, WIDTH - PAD),
            _scale(y, y_low, y_high, HEIGHT - PAD, PAD),
        )
        for x, y in points
    ]

    x_label = "log10 n" if log_log else "n"
    y_label = f"log10 {y_field}" if log_log else y_field
    title = f"{y_field} vs n" + (" (log-log)" if log_log else "")

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" role="img" aria-label="{_esc(title)}">',
        f"<title>{_esc(title)}</title>",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="30.00" text-anchor="middle" font-size="16">'
        f"{_esc(title)}</text>",
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" '
        'stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 20:.2f}" text-anchor="middle" '
        f'font-size="14">{_esc(x_label)}</text>',
        f'<text x="20.00" y="{HEIGHT / 2:.2f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20.00 {HEIGHT / 2:.2f})">{_esc(y_label)}</text>',
        f'<text x="{PAD}" y="{HEIGHT - PAD + 18}" text-anchor="middle" font-size="11">'
        f"{x_low:.6g}</text>",
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 18}" text-anchor="middle" '
        f'font-size="11">{x_high:.6g}</text>',
        f'<text x="{PAD - 6}" y="{HEIGHT - PAD}" text-anchor="end" font-size="11">'
        f"{y_low:.6g}</text>",
        f'<text x="{PAD - 6}" y="{PAD}" text-anchor="end" font-size="11">{y_high:.6g}</text>',
        '<polyline fill="none" stroke="#4e79a7" stroke-width="2" points="'
        + " ".join(f"{px:.2f},{py:.2f}" for px, py in pixels)
        + '"/>',
    ]
    lines.extend(
        f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="#e15759"/>' for px, py in pixels
    )
    if annotation:
        lines.append(
            f'<text x="{PAD + 10}" y="{PAD + 10}" font-size="13" fill="#333">'
            f"{_esc(annotation)}</text>"
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
