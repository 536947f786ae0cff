import json

import pandas as pd
import pytest

from tagtrack.cli.run import main, parse_axis
from tagtrack.errors import ConfigError
from tagtrack.scenario.monte_carlo import MISSION_COLUMNS, RESULT_COLUMNS


def exit_code(argv) -> int:
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


def test_validate_config(tiny_config_path):
    assert exit_code(["validate-config", "--config", str(tiny_config_path)]) == 0
    assert exit_code(["validate-config"]) == 0


def test_validate_config_rejects_bad_override(tiny_config_path):
    argv = ["validate-config", "--config", str(tiny_config_path), "--override", "filter.n_particles=-5"]
    assert exit_code(argv) == 1


def test_validate_config_missing_file(tmp_path):
    assert exit_code(["validate-config", "--config", str(tmp_path / "nope.json")]) == 1


def test_run_writes_results(tiny_config_path, tmp_path):
    out = tmp_path / "out"
    argv = ["run", "--config", str(tiny_config_path), "--trials", "2", "--seed", "4", "--jobs", "1",
            "--output", str(out), "--traces"]
    assert exit_code(argv) == 0

    results = pd.read_csv(out / "results.csv")
    assert list(results.columns) == RESULT_COLUMNS
    assert list(results["seed"]) == [4, 5]
    missions = pd.read_csv(out / "missions.csv")
    assert list(missions.columns) == MISSION_COLUMNS
    assert missions["success"].all()

    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert list(summary) == ["metap"]
    assert summary["metap"]["trials"] == 2

    saved = json.loads((out / "config.json").read_text(encoding="utf-8"))
    assert saved["filter"]["n_particles"] == 200

    decisions = (out / "traces" / "decisions_0000.jsonl").read_text(encoding="utf-8").splitlines()
    assert decisions and "chosen" in json.loads(decisions[0])
    trace = pd.read_csv(out / "traces" / "trace_0001.csv")
    assert set(trace["trial"]) == {1}
    snapshot = (out / "traces" / "belief_0001_tag00.csv").read_text(encoding="utf-8").splitlines()
    assert snapshot[0].startswith("# tag_id=0, r=")
    assert snapshot[1] == "x,y,z,weight"
    assert len(snapshot) == 2 + 200


def test_run_with_invalid_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"mission": {"method": "nope"}}), encoding="utf-8")
    assert exit_code(["run", "--config", str(path), "--output", str(tmp_path / "out")]) == 1
    assert not (tmp_path / "out").exists()


def test_sweep_long_format(tiny_config_path, tmp_path):
    out = tmp_path / "sweep"
    argv = ["sweep", "--config", str(tiny_config_path), "--trials", "1", "--output", str(out),
            "--axis", "mission.method=metap,imp_rssi"]
    assert exit_code(argv) == 0
    long = pd.read_csv(out / "sweep.csv")
    assert long.columns[0] == "mission.method"
    assert sorted(set(long["mission.method"])) == ["imp_rssi", "metap"]
    summary = pd.read_csv(out / "sweep_summary.csv")
    assert len(summary) == 2


def test_sweep_needs_an_axis(tiny_config_path, tmp_path):
    base = ["sweep", "--config", str(tiny_config_path), "--output", str(tmp_path)]
    assert exit_code(base) == 1
    assert exit_code(base + ["--axis", "planner.reward="]) == 1
    assert exit_code(base + ["--axis", "mission.method=metap,warp"]) == 1


def test_parse_axis():
    assert parse_axis("planner.reward=renyi, shannon,cs") == ("planner.reward", ["renyi", "shannon", "cs"])
    with pytest.raises(ConfigError):
        parse_axis("planner.reward")


def test_detector_study_synthetic(tmp_path):
    argv = ["detector-study", "--rotations", "20", "--seed", "3", "--output", str(tmp_path)]
    assert exit_code(argv) == 0
    frame = pd.read_csv(tmp_path / "detector_study.csv")
    assert len(frame) == 20


def test_detector_study_offline(tmp_path):
    log = tmp_path / "rotations.csv"
    pd.DataFrame(
        {
            "timestamp": [float(t) for t in range(12)],
            "tag_id": [1] * 12,
            "rssi_dbm": [-90.0, -88.0, -85.0, -84.0, -86.0, -89.0, -95.0, -99.0, -100.0, -98.0, -96.0, -93.0],
            "heading_rad": [0.5 * k for k in range(12)],
        }
    ).to_csv(log, index=False)
    assert exit_code(["detector-study", "--log", str(log), "--output", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "detector_study_offline.csv")
    assert list(frame["tag_id"]) == [1]


def test_detector_study_bad_rate(tmp_path):
    assert exit_code(["detector-study", "--rotations", "5", "--rate", "1.5", "--output", str(tmp_path)]) == 1
