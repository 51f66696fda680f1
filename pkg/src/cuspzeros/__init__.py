"""Numerical toolkit for critical-line zeros of holomorphic cusp-form L-functions."""

__version__ = "0.1.0"
