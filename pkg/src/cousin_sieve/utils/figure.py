"""CSV and SVG output for the bound-versus-actual figure."""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import structlog

from ..models.schemas import BoundPoint
from .formatting import render_csv

logger = structlog.get_logger(__name__)

CSV_COLUMNS = ("v", "p_v", "w_num", "w_den", "d_prime", "d_lower_tl2", "d_actual")

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 30, 30, 60


def figure_csv(points: Sequence[BoundPoint]) -> str:
    return render_csv(points, CSV_COLUMNS) + "\n"


def _scale(points: Sequence[BoundPoint]) -> Tuple[int, int, int]:
    v_lo, v_hi = points[0].v, points[-1].v
    y_hi = max(max(p.d_actual, p.d_prime) for p in points)
    return v_lo, max(v_hi, v_lo + 1), max(y_hi, 1)


def _polyline(coords: List[Tuple[float, float]], style: str) -> str:
    joined = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
    return f'  <polyline fill="none" stroke="black" stroke-width="1.5"{style} points="{joined}"/>'


def figure_svg(points: Sequence[BoundPoint]) -> str:
    """
    Self-contained SVG line chart: actual counts solid, D' dashed.

    Output depends only on ``points``, so reruns are byte-identical.
    """
    if not points:
        raise ValueError("cannot draw an empty series")
    v_lo, v_hi, y_hi = _scale(points)
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def x(v: int) -> float:
        return LEFT + plot_w * (v - v_lo) / (v_hi - v_lo)

    def y(count: int) -> float:
        return TOP + plot_h * (1 - count / y_hi)

    x_axis_y = TOP + plot_h
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'  <line x1="{LEFT}" y1="{x_axis_y}" x2="{WIDTH - RIGHT}" y2="{x_axis_y}" stroke="black"/>',
        f'  <line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{x_axis_y}" stroke="black"/>',
        _polyline([(x(p.v), y(p.d_actual)) for p in points], ""),
        _polyline([(x(p.v), y(p.d_prime)) for p in points], ' stroke-dasharray="6,4"'),
        f'  <text x="{LEFT + plot_w / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">v</text>',
        f'  <text x="20" y="{TOP + plot_h / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {TOP + plot_h / 2:.2f})">count</text>',
        f'  <text x="{LEFT}" y="{x_axis_y + 18}" text-anchor="middle">{v_lo}</text>',
        f'  <text x="{WIDTH - RIGHT}" y="{x_axis_y + 18}" text-anchor="middle">{points[-1].v}</text>',
        f'  <text x="{LEFT - 8}" y="{x_axis_y}" text-anchor="end">0</text>',
        f'  <text x="{LEFT - 8}" y="{TOP + 4}" text-anchor="end">{y_hi}</text>',
        f'  <text x="{LEFT + 12}" y="{TOP + 14}">actual (solid), D\' (dashed)</text>',
        "</svg>",
    ]
    return "\n".join(lines) + "\n"


def write_figure(
    points: Sequence[BoundPoint],
    csv_path: Optional[Path] = None,
    svg_path: Optional[Path] = None,
) -> List[Path]:
    """Write the requested figure files and return their paths."""
    written = []
    for path, content in ((csv_path, figure_csv), (svg_path, figure_svg)):
        if path is None:
            continue
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content(points), encoding="utf-8")
        written.append(path)
        logger.info("Wrote figure file", path=str(path), points=len(points))
    return written
