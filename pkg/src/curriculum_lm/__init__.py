"""Competence-based curriculum pretraining for a small neural language model."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def fixture_dir() -> Path:
    """Directory of the bundled pre-annotated fixture corpus."""
    return Path(str(resources.files(__name__) / "data" / "fixture"))
