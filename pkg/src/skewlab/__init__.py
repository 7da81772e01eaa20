"""Desk-scale numerics and graph combinatorics for matrices built from skew-shift orbits."""

__version__ = "0.1.0"
