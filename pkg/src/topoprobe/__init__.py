"""Topological complexity measurement of feed-forward networks.

Builds relevance-weighted clique complexes over the neurons of a trained
fully connected network and computes their zero- and one-dimensional
persistent homology, plus the diagram diagnostics and SVG renders.
"""

__version__ = "0.1.0"
