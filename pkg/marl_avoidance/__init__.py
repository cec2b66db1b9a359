"""Multi-agent actor-critic workbench on a deterministic particle world."""

__version__ = "0.1.0"
