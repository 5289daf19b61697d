# This file marks the directory as a Python package.
"""Exact toolkit for existential closedness of the j- and exp-differential equations."""

__version__ = "0.1.0"
