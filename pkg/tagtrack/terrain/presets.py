"""Terrain classes for synthetic missions. Locked reference values, one per class."""

TERRAIN_PRESETS = {
    "flat": {
        "base_elevation": 233.0,
        "relief": 6.0,
        "ridges": 0,
        "ridge_half_width": (0.0, 0.0),
        "ridge_length": (0.0, 0.0),
        "rationale": "Open plain, 233-239 m; an ideal log-distance model is nearly exact",
    },
    "hilly": {
        "base_elevation": 40.0,
        "relief": 37.0,
        "ridges": 6,
        "ridge_half_width": (120.0, 300.0),
        "ridge_length": (300.0, 900.0),
        "rationale": "Rolling coastal hills, 40-77 m; occasional shallow blockage near the ground",
    },
    "mountain": {
        "base_elevation": 595.0,
        "relief": 109.0,
        "ridges": 4,
        "ridge_half_width": (70.0, 180.0),
        "ridge_length": (500.0, 1500.0),
        "rationale": "Steep ranges, 595-704 m; ridges rise above the flight level and shadow tags",
    },
}

# Tags sit under pine-woodland canopy of this depth (meters) in every class
DEFAULT_VEGETATION_DEPTH = 1.0
