"""Identify and remove mislabeled training beats with a cross-validated classifier ensemble."""

from labelguard.labels import ClassLabel
from labelguard.dataset import SampleSet

__version__ = "0.1.0"

__all__ = ["ClassLabel", "SampleSet", "__version__"]
