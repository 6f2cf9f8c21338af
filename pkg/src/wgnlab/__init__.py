"""Weighted Gagliardo-Nirenberg numerical laboratory."""

__version__ = "0.1.0"
