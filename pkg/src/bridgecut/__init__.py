"""Brownian bridge cuts, random mapping walks and their distributional identities."""

__version__ = "0.1.0"
