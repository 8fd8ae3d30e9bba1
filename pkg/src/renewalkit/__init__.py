"""Exact lattice structure, stable limits and renewal sums for heavy-tailed random walks."""
__version__ = "0.1.0"
