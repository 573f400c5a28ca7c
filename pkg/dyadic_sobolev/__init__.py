"""Dyadic Haar toolkit for fractional Sobolev spaces on the line."""

__version__ = "1.0.0"
