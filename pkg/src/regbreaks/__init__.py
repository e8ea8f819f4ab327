"""Seasonal-trend decomposition and structural break detection by penalized least squares."""

__version__ = "0.1.0"
