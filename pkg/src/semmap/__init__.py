"""Probabilistic bird's-eye-view semantic mapping from label images and a dense point map."""

__version__ = "0.1.0"
