"""Exact and semiclassical numerics for the anharmonic Lipkin-Meshkov-Glick model."""

__version__ = "0.1.0"

from .model import ModelParams, ParitySector  # noqa: E402

__all__ = ["ModelParams", "ParitySector", "__version__"]
