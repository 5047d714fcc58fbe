"""Finite-scale workbench for countable infinitary theories."""
__version__ = "0.1.0"
