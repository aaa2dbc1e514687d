"""Exact SU(3) Gelfand-Tsetlin calculus with harmonic-analysis diagnostics."""

__version__ = "0.1.0"

from .gtcore import CapacityError, InvalidLabelError, Irrep, weyl_dim  # noqa: F401
