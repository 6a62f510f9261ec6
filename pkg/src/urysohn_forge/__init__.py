"""Finite-scale constructions in the rational Urysohn space."""

__version__ = "0.1.0"
