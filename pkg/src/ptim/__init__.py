"""Projective transverse-field Ising circuits: simulation and analysis."""

__version__ = "0.1.0"
