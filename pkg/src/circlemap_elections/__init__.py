"""Circle-map dynamics and sequential proportional election methods."""

__all__ = ["__version__"]
__version__ = "0.1.0"
