"""Compositional splitting of near-identity holomorphic maps on planar Cartan pairs."""

__version__ = "0.1.0"
