"""Diffusive (heat-kernel) wavelets on the circle, S^3, S^2 = SO(3)/SO(2) and lens spaces."""

__version__ = "0.1.0"
