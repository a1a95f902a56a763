"""Simulation and analysis tools for purifying two-colorable graph states."""

__version__ = "0.1.0"
