"""Scalar wave scattering by many small impedance balls and its homogenized limit."""

__version__ = "0.1.0"
