"""Numerical index-theory workbench for discretised Dirac-Schrodinger operators."""

__version__ = "0.1.0"
