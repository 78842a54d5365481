"""Quasi-Fuchsian representations into SO(2,n): numerical anti-de Sitter
geometry, convex cores, Dirichlet domains and Anosov contraction
certificates."""

__version__ = "0.1.0"
