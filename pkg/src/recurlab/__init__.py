"""Finite-model laboratory for multiple recurrence, cocycles and extremal pattern sets."""

__version__ = "0.1.0"
