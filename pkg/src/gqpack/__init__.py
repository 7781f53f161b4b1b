"""Kantor-family packings of triangle-free partial linear spaces and the
Turan-graph clique packings built from them."""

__version__ = "0.1.0"
