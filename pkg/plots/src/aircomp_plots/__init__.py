"""Figure rendering for movable-antenna AirComp sweep CSVs."""

from .render import RenderError, main

__all__ = ["RenderError", "main", "render"]
__version__ = "0.1.0"
