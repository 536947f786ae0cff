import os
from dotenv import load_dotenv

load_dotenv()

# Default output directory for `run` / `sweep` when --output is not given
TAGTRACK_OUTPUT_DIR = os.environ.get("TAGTRACK_OUTPUT_DIR", "results")

# Parallel Monte-Carlo workers when --jobs is not given
TAGTRACK_JOBS = int(os.environ.get("TAGTRACK_JOBS", "1"))

# Simulated seconds before a mission is cut off and flagged partial
TAGTRACK_TIME_CAP_S = float(os.environ.get("TAGTRACK_TIME_CAP_S", "3600"))

# Valid enum values for scenario validation
VALID_TERRAIN_KINDS = {"flat", "hilly", "mountain"}

VALID_METHODS = {
    "metap",
    "imp_rssi",
    "caoa20",
    "aoa_rssi_20",
    "aoa_rssi_45",
    "pf_baseline",
}

VALID_REWARD_KINDS = {"renyi", "shannon", "cs"}

VALID_MOBILITY = {"static", "wandering"}

VALID_ANTENNA_KINDS = {"cardioid", "two_lobe"}

# Display names used in summaries and result tables
METHOD_LABELS: dict[str, str] = {
    "metap": "METAP",
    "imp_rssi": "ImpRSSI",
    "caoa20": "cAoA20",
    "aoa_rssi_20": "AoA+RSSI(20)",
    "aoa_rssi_45": "AoA+RSSI(45)",
    "pf_baseline": "PFBaseline",
}
