"""Numerical first variation of integrals of log-concave functions."""

__version__ = "0.1.0"
