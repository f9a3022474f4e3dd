"""Achievable rate regions for the generalized Gaussian/discrete MAC with states."""

__version__ = "0.1.0"
