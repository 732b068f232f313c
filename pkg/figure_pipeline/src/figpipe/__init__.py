"""Figure rendering for projective-Ising scan CSVs."""

from .data import SCHEMA, Row, load_rows, curve
from .render import FigureSpec, render

__all__ = ["SCHEMA", "Row", "load_rows", "curve", "FigureSpec", "render"]
