"""Gaussian filtering with an active resistor network, and a SIFT pipeline built on it."""

__version__ = "0.1.0"
