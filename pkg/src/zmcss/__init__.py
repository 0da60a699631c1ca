"""Numerical toolkit for the zero-mass Chern-Simons-Schroedinger system."""
__version__ = "0.1.0"
