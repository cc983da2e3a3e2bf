"""Toolkit for typed simplicial complexes: spectra, discrepancy and geometric overlap."""

__version__ = "0.1.0"
