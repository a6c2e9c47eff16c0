"""Curation and evaluation workbench for ambiguous visual questions."""

__version__ = "0.1.0"
