"""Speckle-based non-line-of-sight object recognition: wave-optics simulator and SimpleNet classifier."""

__version__ = "0.1.0"
