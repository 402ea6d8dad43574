"""Infer individual vertex degrees from steady states of network dynamics."""

__version__ = "0.1.0"
