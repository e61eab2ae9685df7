# hardylab/__init__.py
"""Numerical lab for sharp Hardy, Rellich and Hardy-Rellich inequalities."""

__version__ = "0.1.0"
