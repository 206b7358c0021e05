"""Representative days with extreme-day pinning and linked day blocks for
transmission, wind and storage co-planning."""

__version__ = "0.1.0"
