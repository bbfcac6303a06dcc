"""LEO satellite network simulator with block-based hierarchical routing."""

__version__ = "0.1.0"
