"""Spatial-aware correlated multiple-instance learning."""

__version__ = "0.1.0"
