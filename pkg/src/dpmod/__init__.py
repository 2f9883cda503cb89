"""Mapping class groups of del Pezzo manifolds as integral orthogonal groups."""

__version__ = "0.1.0"
