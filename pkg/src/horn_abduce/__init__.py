"""Optimal Horn abduction with term equivalence and bounded value invention."""

__version__ = "0.1.0"
