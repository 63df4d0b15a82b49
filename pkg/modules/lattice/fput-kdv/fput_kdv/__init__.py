"""FPUT lattice integration and KdV approximation experiments."""

__version__ = "0.1.0"
