"""Spectra of the PT-symmetric family H = p^2 + x^2 (ix)^eps."""
__version__ = "0.1.0"
