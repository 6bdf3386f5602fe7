"""Top-down race figures from trackduel trajectory exports."""

__version__ = "0.1.0"
