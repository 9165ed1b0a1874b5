"""Overlapping domain decomposition with source transfer for 2D Helmholtz problems."""

__version__ = "0.1.0"
