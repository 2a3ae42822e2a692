"""commlat: locate, track, and attribute MPI process-communication latency."""

from .config import AnalysisConfig
from .pipeline import Analysis, load_paired_trace

__version__ = "0.1.0"

__all__ = ["Analysis", "AnalysisConfig", "load_paired_trace", "__version__"]
