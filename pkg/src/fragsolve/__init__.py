"""Closed-form solutions and numerical references for growth and decay
fragmentation equations with power-law rates."""

__version__ = "0.1.0"
