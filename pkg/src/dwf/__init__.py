"""Floquet simulator for a driven double-well optical lattice."""

__version__ = "0.1.0"
