"""Figure rendering for afcsim run artifacts."""

__version__ = "0.1.0"

from .figures import FigureSpec, render

__all__ = ["FigureSpec", "render", "__version__"]
