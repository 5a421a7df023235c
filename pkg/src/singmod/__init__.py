"""Traces of singular moduli, Kohnen plus space bases and Borcherds products."""

__version__ = "0.1.0"
