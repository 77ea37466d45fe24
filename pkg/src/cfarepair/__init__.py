"""Verified repair of small imperative programs against a reference solution."""

__version__ = "0.1.0"
