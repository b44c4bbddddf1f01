"""Simulation, analysis and shuttling-schedule toolkit for a flag-based parity check."""

__version__ = "0.1.0"
