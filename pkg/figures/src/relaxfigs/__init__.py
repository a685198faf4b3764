"""Batch figure rendering for relaxlab run directories.

Reads only the documented CSV/JSON artifacts of a completed run; never
imports the simulation package.
"""

from .render import FigureSpec, render

__all__ = ["FigureSpec", "render"]
