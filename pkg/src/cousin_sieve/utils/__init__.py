"""Utilities package."""

from .figure import figure_csv, figure_svg, write_figure
from .formatting import render, render_csv, render_json, render_table

__all__ = [
    "figure_csv",
    "figure_svg",
    "write_figure",
    "render",
    "render_csv",
    "render_json",
    "render_table",
]
