"""seedlingcv: plant-seedling classification from scratch.

HSV/morphology background segmentation, KNN and linear-SVM baselines
with grid search, and a small CNN trained with Adam and class-weighted
cross-entropy, all on a seeded-deterministic numpy core.
"""

__version__ = "0.1.0"

from .errors import (
    CheckpointError,
    ConfigError,
    CorruptImageError,
    DatasetError,
    ImageError,
    SeedlingError,
    UnsupportedFormatError,
)

__all__ = [
    "__version__",
    "SeedlingError",
    "ImageError",
    "UnsupportedFormatError",
    "CorruptImageError",
    "DatasetError",
    "CheckpointError",
    "ConfigError",
]
