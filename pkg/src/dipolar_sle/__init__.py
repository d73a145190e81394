"""Numerical laboratory for dipolar SLE(4) and the mixed-boundary free field."""

__version__ = "0.1.0"
