"""
File outputs. Payload files (scores, sweeps, bench reports, synthetic series)
are deterministic: they never contain timestamps, hostnames or runtimes.
Those go to a separate run manifest plus an append-only manifest index.
"""

from __future__ import annotations

import logging
import math
import socket
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from . import __version__
from .baselines import SweepResult
from .common import append_jsonl, ensure_dir, get_git_info, stable_settings_hash, write_json_atomic
from .detector import ScoreSeries
from .evaluation import BenchReport
from .series_core import TimeSeries

logger = logging.getLogger("radtd.artifacts")

FLOAT_FORMAT = "%.17g"


def _clean(value: Any) -> Any:
    if value is pd.NA:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, (np.floating,)):
        return None if math.isnan(float(value)) else float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return [{k: _clean(v) for k, v in row.items()} for row in frame.to_dict(orient="records")]


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    ensure_dir(path.parent)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def window_frame(scores: ScoreSeries) -> pd.DataFrame:
    flagged = scores.flags.astype(int) if scores.flags is not None else pd.array([pd.NA] * len(scores), dtype="Int64")
    return pd.DataFrame(
        {"start_index": scores.starts, "score": scores.scores, "pattern_id": scores.pattern_ids, "flagged": flagged}
    )


def point_frame(scores: ScoreSeries) -> pd.DataFrame:
    point_flags = scores.point_flags()
    flagged = point_flags.astype(int) if point_flags is not None else pd.array([pd.NA] * scores.n, dtype="Int64")
    return pd.DataFrame({"index": np.arange(scores.n), "score": scores.point_scores(), "flagged": flagged})


def write_scores(scores: ScoreSeries, out_prefix: Path) -> Dict[str, Path]:
    """<prefix>.windows.csv, <prefix>.points.csv and the <prefix>.scores.json mirror."""
    out_prefix = Path(out_prefix)
    paths = {
        "windows": out_prefix.with_name(out_prefix.name + ".windows.csv"),
        "points": out_prefix.with_name(out_prefix.name + ".points.csv"),
        "json": out_prefix.with_name(out_prefix.name + ".scores.json"),
    }
    windows_df = window_frame(scores)
    points_df = point_frame(scores)
    _write_csv(windows_df, paths["windows"])
    _write_csv(points_df, paths["points"])
    write_json_atomic(
        paths["json"],
        {
            "name": scores.name,
            "method": scores.method,
            "epsilon": scores.epsilon,
            "w": scores.w,
            "hop": scores.hop,
            "n": scores.n,
            "windows": _records(windows_df),
            "points": _records(points_df),
        },
    )
    logger.info("[scores] wrote: %s | windows=%d | points=%d", paths["windows"], len(scores), scores.n)
    return paths


def write_sweep_csv(result: SweepResult, path: Path) -> Path:
    path = Path(path)
    _write_csv(result.to_frame(), path)
    logger.info("[sweep] wrote: %s | rows=%d", path, result.epsilons.size)
    return path


def write_bench(report: BenchReport, out_dir: Path) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    ensure_dir(out_dir)
    records = report.to_frame()
    aggregate = report.aggregate()
    paths = {
        "records_csv": out_dir / "bench_records.csv",
        "records_json": out_dir / "bench_records.json",
        "aggregate_csv": out_dir / "bench_aggregate.csv",
        "aggregate_json": out_dir / "bench_aggregate.json",
    }
    _write_csv(records, paths["records_csv"])
    _write_csv(aggregate, paths["aggregate_csv"])
    write_json_atomic(paths["records_json"], {"records": _records(records), "notes": list(report.notes)})
    write_json_atomic(paths["aggregate_json"], {"aggregate": _records(aggregate)})
    logger.info("[bench] wrote: %s | rows=%d | aggregate_rows=%d", out_dir, len(records), len(aggregate))
    return paths


def write_series_csv(series: TimeSeries, path: Path) -> Path:
    path = Path(path)
    frame = pd.DataFrame({"timestamp": series.timestamps})
    for i, col in enumerate(series.columns):
        frame[col] = series.values[:, i]
    if series.labels is not None:
        frame["is_anomaly"] = series.labels.astype(int)
    _write_csv(frame, path)
    logger.info("[synth] wrote: %s | n=%d | anomalies=%d", path, series.n, 0 if series.labels is None else int(series.labels.sum()))
    return path


def write_run_manifest(
    out_dir: Path,
    command: str,
    settings: Dict[str, Any],
    started: datetime,
    finished: datetime,
    outputs: Dict[str, Any],
    outcomes: Optional[Dict[str, Any]] = None,
    runtimes: Optional[List[Dict[str, Any]]] = None,
) -> Path:
    """run_manifest_<ts>_<settings hash>.json next to the payloads, plus one line in run_manifests_index.jsonl."""
    out_dir = Path(out_dir)
    ensure_dir(out_dir)
    settings_hash = stable_settings_hash(settings)
    git_commit, git_dirty = get_git_info(Path(__file__).resolve().parent)
    manifest = {
        "run_id": f"{started.strftime('%Y%m%d_%H%M%S')}_{settings_hash}",
        "command": command,
        "started_at_utc": started.isoformat().replace("+00:00", "Z"),
        "finished_at_utc": finished.isoformat().replace("+00:00", "Z"),
        "duration_s": (finished - started).total_seconds(),
        "versions": {"radtd_version": __version__},
        "settings": settings,
        "settings_hash": settings_hash,
        "system": {
            "hostname": socket.gethostname(),
            "platform": sys.platform,
            "python_version": sys.version.split()[0],
        },
        "repo": {"git_commit": git_commit, "git_dirty": git_dirty},
        "outputs": {k: str(v) for k, v in outputs.items()},
        "outcomes": outcomes or {},
        "runtimes": runtimes or [],
    }
    name = f"run_manifest_{finished.strftime('%Y%m%d_%H%M%S')}_{settings_hash}.json"
    path = out_dir / name
    write_json_atomic(path, manifest)
    append_jsonl(
        out_dir / "run_manifests_index.jsonl",
        {
            "manifest_filename": name,
            "command": command,
            "started_at_utc": manifest["started_at_utc"],
            "finished_at_utc": manifest["finished_at_utc"],
            "duration_s": manifest["duration_s"],
            "settings_hash": settings_hash,
        },
    )
    logger.info("[manifest] wrote: %s", path)
    return path
