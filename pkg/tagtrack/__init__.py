"""tagtrack: terrain-aware radio-tag localization from a small UAV."""

__version__ = "0.3.0"
