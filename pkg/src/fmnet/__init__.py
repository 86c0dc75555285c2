"""Fast multipole networks: potential fields, backbone graphs, and metrics."""

__version__ = "0.1.0"
