"""Finite-scale constructions behind determinacy transfer for shift actions."""

__version__ = "0.1.0"
