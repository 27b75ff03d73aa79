"""Numerical laboratory for the cubic-NLS modulation approximation of 2D
infinite-depth gravity water waves in transformed (quadratic-free) coordinates."""

__version__ = "0.1.0"
