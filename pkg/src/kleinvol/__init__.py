"""Volumes of non-orientable hyperbolic surfaces with geodesic boundary, their
b-weighted combinations, and the refined recursion differentials that encode them."""

__version__ = "0.1.0"
