"""Coined quantum walks on two-dimensional tori: spectra, limiting
distributions, mixing times and abstract search."""

__version__ = "0.1.0"
