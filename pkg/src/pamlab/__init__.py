"""Numerical laboratory for the parabolic Anderson model with Weibull potential."""

__version__ = "0.1.0"
