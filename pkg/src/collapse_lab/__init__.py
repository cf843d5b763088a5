"""Numerical laboratory for the adiabatic collapse of the 4+1 Yang-Mills instanton."""

__version__ = "0.1.0"
