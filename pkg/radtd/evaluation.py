"""
Benchmark harness: run the selected methods on every labeled CSV instance
under a dataset root, once per seed, and summarise AUC per benchmark family.

Families are the instance's parent directory (A1Benchmark, A2Benchmark, ...).
RQA methods have no random state; they are evaluated once per instance at
the best recurrence threshold of the sweep and repeated for each seed row.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from .baselines import threshold_sweep
from .common import derive_seed, iter_csv_files
from .config import METHODS, ColumnSchema, RadtdConfig
from .detector import fit_detect
from .errors import ConfigError, DataError
from .metrics import auc, has_both_classes
from .series_core import load_series

logger = logging.getLogger("radtd.evaluation")

__all__ = ["auc", "BenchRecord", "BenchReport", "bench", "evaluate_instance"]

RECORD_COLUMNS = ("dataset", "instance", "method", "seed", "auc", "optimal_epsilon", "status", "note")
ALL_FAMILY = "all"

_RQA_INDICATOR = {"rqa_rr": "RR", "rqa_det": "DET", "rqa_lam": "LAM"}


@dataclass(frozen=True)
class BenchRecord:
    dataset: str
    instance: str
    method: str
    seed: int
    auc: Optional[float] = None
    optimal_epsilon: Optional[float] = None
    status: str = "ok"
    note: str = ""
    runtime: float = field(default=0.0, compare=False)

    def payload(self) -> Dict[str, object]:
        row = asdict(self)
        row.pop("runtime")
        return row


@dataclass
class BenchReport:
    records: List[BenchRecord] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        rows = [r.payload() for r in self.records]
        frame = pd.DataFrame(rows, columns=list(RECORD_COLUMNS))
        return frame.sort_values(["dataset", "instance", "method", "seed"], kind="stable").reset_index(drop=True)

    def aggregate(self) -> pd.DataFrame:
        """Mean/std/count of AUC and median optimal threshold per (family, method), ranked within family."""
        ok = self.to_frame()
        ok = ok[ok["status"] == "ok"].copy()
        cols = ["dataset", "method", "mean_auc", "std_auc", "count", "rank", "median_optimal_epsilon"]
        if ok.empty:
            return pd.DataFrame(columns=cols)
        ok["auc"] = ok["auc"].astype(float)
        ok["optimal_epsilon"] = pd.to_numeric(ok["optimal_epsilon"], errors="coerce")
        if ok["dataset"].nunique() > 1:
            ok = pd.concat([ok, ok.assign(dataset=ALL_FAMILY)], ignore_index=True)
        grouped = ok.groupby(["dataset", "method"], sort=True)
        agg = grouped.agg(
            mean_auc=("auc", "mean"),
            std_auc=("auc", lambda s: float(np.std(s.to_numpy(), ddof=0))),
            count=("auc", "size"),
            median_optimal_epsilon=("optimal_epsilon", "median"),
        ).reset_index()
        agg["rank"] = agg.groupby("dataset")["mean_auc"].rank(ascending=False, method="min").astype(int)
        return agg[cols].sort_values(["dataset", "rank", "method"], kind="stable").reset_index(drop=True)

    def runtimes(self) -> List[Dict[str, object]]:
        return [
            {"dataset": r.dataset, "instance": r.instance, "method": r.method, "seed": r.seed, "runtime_s": round(r.runtime, 6)}
            for r in self.records
        ]


def _family(path: Path, root: Path) -> str:
    if root.is_file():
        return path.parent.name or "dataset"
    rel = path.relative_to(root)
    return rel.parts[-2] if len(rel.parts) > 1 else root.name


def _instance_name(path: Path, root: Path) -> str:
    return path.name if root.is_file() else path.relative_to(root).as_posix()


def evaluate_instance(
    path: Path,
    family: str,
    instance: str,
    methods: Sequence[str],
    cfg: RadtdConfig,
    seeds: Sequence[int],
    schema: Optional[ColumnSchema] = None,
) -> Tuple[List[BenchRecord], Optional[str]]:
    """Records for one instance plus an optional note (skipped instances produce no records)."""
    try:
        series = load_series(path, schema, name=Path(instance).stem)
    except (DataError, FileNotFoundError) as exc:
        logger.warning("[bench] failed to load %s: %s", instance, exc)
        return [BenchRecord(family, instance, m, s, status="failed", note=str(exc)) for m in methods for s in seeds], None
    if series.labels is None or not has_both_classes(series.labels):
        note = f"skipped {instance}: labels missing or single-class"
        logger.info("[bench] %s", note)
        return [], note

    records: List[BenchRecord] = []
    rqa = [m for m in methods if m in _RQA_INDICATOR]
    if rqa:
        t0 = time.perf_counter()
        try:
            sweep = threshold_sweep(series, cfg, include_radtd=False)
            best = sweep.best()
            elapsed = (time.perf_counter() - t0) / len(rqa)
            for m in rqa:
                value, eps = best[_RQA_INDICATOR[m]]
                records.extend(BenchRecord(family, instance, m, s, value, eps, runtime=elapsed) for s in seeds)
        except Exception as exc:
            logger.warning("[bench] %s rqa failed: %s", instance, exc)
            records.extend(BenchRecord(family, instance, m, s, status="failed", note=str(exc)) for m in rqa for s in seeds)

    for m in methods:
        if m in _RQA_INDICATOR:
            continue
        representation = "urp" if m == "radtd" else "raw"
        for s in seeds:
            seeded = cfg.model_copy(update={"seed": derive_seed(s, instance)})
            t0 = time.perf_counter()
            try:
                scored = fit_detect(series, seeded, representation)
                value = auc(scored.point_scores(), series.labels)
                records.append(BenchRecord(family, instance, m, s, value, runtime=time.perf_counter() - t0))
            except Exception as exc:
                logger.warning("[bench] %s %s seed=%d failed: %s", instance, m, s, exc)
                records.append(BenchRecord(family, instance, m, s, status="failed", note=str(exc), runtime=time.perf_counter() - t0))
    return records, None


def bench(
    root: Path,
    methods: Sequence[str] = METHODS,
    cfg: Optional[RadtdConfig] = None,
    seeds: Sequence[int] = (0,),
    exclude: Sequence[str] = ("*_all.csv",),
    schema: Optional[ColumnSchema] = None,
    jobs: int = 1,
    progress: bool = False,
) -> BenchReport:
    cfg = cfg or RadtdConfig()
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"Missing dataset root: {root.resolve()}")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigError(f"unknown methods: {unknown}")
    files = iter_csv_files(root, recursive=True, exclude_globs=exclude)
    logger.info("[bench] root=%s | instances=%d | methods=%s | seeds=%s | jobs=%d", root, len(files), list(methods), list(seeds), jobs)

    tasks = [(p, _family(p, root), _instance_name(p, root)) for p in files]
    iterator = tqdm(tasks, desc="bench", unit="instance", disable=not progress)
    if jobs > 1:
        results = Parallel(n_jobs=jobs)(
            delayed(evaluate_instance)(p, fam, inst, methods, cfg, seeds, schema) for p, fam, inst in iterator
        )
    else:
        results = [evaluate_instance(p, fam, inst, methods, cfg, seeds, schema) for p, fam, inst in iterator]

    report = BenchReport()
    for records, note in results:
        report.records.extend(records)
        if note:
            report.notes.append(note)
    failed = sum(1 for r in report.records if r.status == "failed")
    logger.info("[bench] rows=%d | failed=%d | skipped=%d", len(report.records), failed, len(report.notes))
    return report
