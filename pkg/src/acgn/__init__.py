"""Semantic action-conditional video prediction on procedural 2-D worlds."""

__version__ = "0.1.0"
