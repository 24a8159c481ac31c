"""Numerical estimates of Hausdorff, spectral and walk dimensions."""

__version__ = "0.1.0"
