"""Singularity analysis (ARS / Painleve test) for polynomial second-order ODE systems."""

__version__ = "0.1.0"
