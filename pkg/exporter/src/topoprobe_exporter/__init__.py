"""Desk-scale digit classifiers exported as topoprobe weights-JSON files."""

__version__ = "0.1.0"
