"""Constructive machinery for Hamilton cycles in dense 3-connected regular graphs."""

from .graph_core import Graph

__version__ = "0.1.0"
__all__ = ["Graph", "__version__"]
