"""Outer functions on the unit disk and membership tests for analytic
weighted Lipschitz algebras."""

__version__ = "0.1.0"
