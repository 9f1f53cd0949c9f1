"""Multiple-source detection in networks via edge clustering and label propagation."""

from .errors import MSDError
from .graph import Graph, load_edge_list, stats
from .msd import DetectionResult, detect

__version__ = "0.1.0"

__all__ = ["DetectionResult", "Graph", "MSDError", "detect", "load_edge_list", "stats", "__version__"]
