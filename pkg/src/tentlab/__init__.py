"""Numerical laboratory for Orlicz-Hardy spaces of divergence-form operators on a torus."""

__version__ = "0.1.0"
