"""Numerical workbench for primitive cubic Dirichlet characters and their character sums."""

__version__ = "0.1.0"
