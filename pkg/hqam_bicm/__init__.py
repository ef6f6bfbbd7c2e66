"""Design toolkit for hierarchical constellations with bit-interleaved coded modulation."""

__version__ = "0.1.0"
