"""Cyclic formality on polynomial algebras: exact Hochschild calculus,
the cyclic HKR map, Monte Carlo graph weights and star products."""

__version__ = "0.1.0"
