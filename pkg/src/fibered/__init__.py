"""Fiberwise dimensionality reduction over a known base map."""

from .data_model import Dataset, PersistenceDiagram, PipelineConfig, load_dataset, seeded_rng
from .pipeline import FiberedResult, PipelineError, run_fibered

__all__ = [
    "Dataset",
    "PersistenceDiagram",
    "PipelineConfig",
    "FiberedResult",
    "PipelineError",
    "load_dataset",
    "run_fibered",
    "seeded_rng",
]
