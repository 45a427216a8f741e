"""Numerics for weighted L² extension constants on planar domains."""

__version__ = "0.1.0"
