"""Per-rotation record of detected pulses and the UAV heading at each detection."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from tagtrack.scenario.state import wrap_angle

ROTATION_LOG_COLUMNS = ["timestamp", "tag_id", "rssi_dbm", "heading_rad"]


@dataclass(frozen=True, eq=False)
class RotationLog:
    rssi: np.ndarray  # dBm per detected pulse
    headings: np.ndarray  # UAV heading at each detection, radians
    duration: float  # seconds
    expected_count: int  # pulses emitted during the rotation
    tag_id: int = 0
    timestamp: float = 0.0  # end of rotation

    def __post_init__(self) -> None:
        rssi = np.asarray(self.rssi, dtype=float).reshape(-1)
        headings = np.asarray(wrap_angle(np.asarray(self.headings, dtype=float)), dtype=float).reshape(-1)
        if rssi.shape != headings.shape:
            raise ValueError("rssi and headings must have the same length")
        if len(rssi) > self.expected_count:
            raise ValueError(
                f"{len(rssi)} detections exceed the expected pulse count {self.expected_count}"
            )
        object.__setattr__(self, "rssi", rssi)
        object.__setattr__(self, "headings", headings)

    @property
    def count(self) -> int:
        return len(self.rssi)

    @property
    def detection_fraction(self) -> float:
        if self.expected_count == 0:
            return 0.0
        return self.count / self.expected_count


def load_rotation_logs(path: str | Path, pulse_interval: float = 1.0) -> dict[int, RotationLog]:
    """Read detections from CSV (timestamp, tag_id, rssi_dbm, heading_rad).

    Each tag's rows form one rotation; the expected pulse count is the
    number of pulse slots spanned by its timestamps.
    """
    frame = pd.read_csv(path)
    missing = [c for c in ROTATION_LOG_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"rotation log {path} is missing columns: {', '.join(missing)}")

    logs: dict[int, RotationLog] = {}
    for tag_id, rows in frame.sort_values(["tag_id", "timestamp"]).groupby("tag_id", sort=True):
        times = rows["timestamp"].to_numpy(dtype=float)
        span = float(times[-1] - times[0])
        expected = int(round(span / pulse_interval)) + 1
        logs[int(tag_id)] = RotationLog(
            rssi=rows["rssi_dbm"].to_numpy(dtype=float),
            headings=rows["heading_rad"].to_numpy(dtype=float),
            duration=span + pulse_interval,
            expected_count=max(expected, len(rows)),
            tag_id=int(tag_id),
            timestamp=float(times[-1]),
        )
    return logs

