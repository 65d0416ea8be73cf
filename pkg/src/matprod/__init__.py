"""Spectra of products of independent random matrices and their limit laws."""

__version__ = "0.1.0"
