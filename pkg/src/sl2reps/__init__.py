"""Numerical toolkit for SL2(C) representation varieties of finitely presented groups."""

__version__ = "0.1.0"
