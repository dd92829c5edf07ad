"""Spectral solvers for the rotating-film operator family and its small-eps limit."""

__version__ = "0.1.0"
