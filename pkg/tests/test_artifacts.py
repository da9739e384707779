import json
from datetime import datetime, timezone

import numpy as np
import pandas as pd

from radtd.artifacts import write_bench, write_run_manifest, write_scores
from radtd.detector import ScoreSeries
from radtd.evaluation import BenchRecord, BenchReport


def test_unflagged_scores_leave_flag_columns_empty(tmp_path):
    scores = ScoreSeries([0, 1], [0.0, 0.5], [-1, -1], None, None, 4, 3, name="s", method="rqa_rr")
    paths = write_scores(scores, tmp_path / "s")
    points = pd.read_csv(paths["points"])
    np.testing.assert_array_equal(points["score"], [0.0, 0.5, 0.5, 0.5])
    assert points["flagged"].isna().all()
    payload = json.loads(paths["json"].read_text(encoding="utf-8"))
    assert payload["epsilon"] is None
    assert payload["windows"][1] == {"start_index": 1, "score": 0.5, "pattern_id": -1, "flagged": None}


def test_bench_json_keeps_notes_and_drops_runtimes(tmp_path):
    report = BenchReport(
        [BenchRecord("A", "a.csv", "radtd", 0, 0.75, runtime=3.5)],
        ["skipped b.csv: labels missing or single-class"],
    )
    paths = write_bench(report, tmp_path)
    records = json.loads(paths["records_json"].read_text(encoding="utf-8"))
    assert records["notes"] == report.notes
    assert "runtime" not in records["records"][0]
    assert records["records"][0]["optimal_epsilon"] is None
    aggregate = json.loads(paths["aggregate_json"].read_text(encoding="utf-8"))["aggregate"]
    assert aggregate[0]["mean_auc"] == 0.75 and aggregate[0]["rank"] == 1


def test_manifest_and_index(tmp_path):
    started = datetime(2024, 1, 1, tzinfo=timezone.utc)
    finished = datetime(2024, 1, 1, 0, 0, 5, tzinfo=timezone.utc)
    path = write_run_manifest(tmp_path, "fit", {"w": 15}, started, finished, {"model": tmp_path / "m.selfset.json"})
    manifest = json.loads(path.read_text(encoding="utf-8"))
    assert manifest["command"] == "fit"
    assert manifest["duration_s"] == 5.0
    assert manifest["settings"] == {"w": 15}
    write_run_manifest(tmp_path, "fit", {"w": 15}, started, finished, {})
    lines = (tmp_path / "run_manifests_index.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["settings_hash"] == manifest["settings_hash"]
