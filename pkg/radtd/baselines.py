"""
Comparison methods: the ELM-AE on raw subsequences, RQA indicator differencing,
and the sweep of RQA AUC over recurrence thresholds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from .config import RadtdConfig
from .detector import ScoreSeries, fit_detect
from .errors import ConfigError, DataError
from .metrics import auc
from .recurrence import INDICATORS, EmbeddingConfig, rqa_stack, urp_stack
from .series_core import TimeSeries, WindowPlan, rescale, windows

logger = logging.getLogger("radtd.baselines")

# 0.1 .. 5.0; zero is left out because it leaves only the line of identity
SWEEP_EPSILONS = np.round(np.arange(1, 51) * 0.1, 10)

SWEEP_COLUMNS = ("epsilon", "rr_auc", "det_auc", "lam_auc", "radtd_auc")


@dataclass(frozen=True)
class SweepResult:
    epsilons: np.ndarray
    auc_per_indicator: Dict[str, np.ndarray]
    radtd_auc: Optional[float] = None

    def __post_init__(self) -> None:
        eps = np.asarray(self.epsilons, dtype=np.float64)
        curves = {k: np.asarray(v, dtype=np.float64) for k, v in self.auc_per_indicator.items()}
        for name, curve in curves.items():
            if curve.shape != eps.shape:
                raise DataError(f"{name} curve has {curve.size} points for {eps.size} thresholds")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "auc_per_indicator", curves)

    def best(self) -> Dict[str, Tuple[float, float]]:
        """indicator -> (maximum AUC, smallest threshold attaining it)."""
        out: Dict[str, Tuple[float, float]] = {}
        for name, curve in self.auc_per_indicator.items():
            i = int(np.argmax(curve))
            out[name] = (float(curve[i]), float(self.epsilons[i]))
        return out

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"epsilon": self.epsilons})
        for name in INDICATORS:
            frame[f"{name.lower()}_auc"] = self.auc_per_indicator.get(name, np.full(self.epsilons.shape, np.nan))
        frame["radtd_auc"] = np.nan if self.radtd_auc is None else self.radtd_auc
        return frame[list(SWEEP_COLUMNS)]


def elmae_baseline(series: TimeSeries, cfg: RadtdConfig, jobs: int = 1, training: Optional[TimeSeries] = None) -> ScoreSeries:
    """ELM-AE trained and scored on raw w-length subsequences instead of URPs."""
    return fit_detect(series, cfg, "raw", jobs, training)


def _indicator_index(indicator: str) -> int:
    key = indicator.upper()
    if key not in INDICATORS:
        raise ConfigError(f"unknown RQA indicator {indicator!r} (choose from {list(INDICATORS)})")
    return INDICATORS.index(key)


def urps_for_rqa(series: TimeSeries, cfg: RadtdConfig) -> Tuple[np.ndarray, np.ndarray]:
    """(starts, (T, n, n) URPs) of the self-rescaled series with stride `rqa_stride`."""
    wins = windows(rescale(series), WindowPlan(cfg.w, cfg.rqa_stride))
    return wins.starts, urp_stack(wins.segments, EmbeddingConfig(cfg.m, cfg.tau))


def indicator_series(urps: np.ndarray, rp_epsilon: float, cfg: RadtdConfig) -> np.ndarray:
    """(T, 3) RR/DET/LAM of each window at one recurrence threshold."""
    if rp_epsilon < 0:
        raise ConfigError(f"RP threshold must be >= 0 (got {rp_epsilon})")
    return rqa_stack(urps <= rp_epsilon, cfg.l_min, cfg.v_min)


def difference_scores(values: np.ndarray, mode: str = "diff", median_window: int = 10) -> np.ndarray:
    """High change in an indicator is anomalous; the first window scores 0."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return v.copy()
    if mode == "diff":
        out = np.abs(np.diff(v, prepend=v[0]))
    elif mode == "median":
        trailing = pd.Series(v).rolling(median_window, min_periods=1).median().shift(1)
        out = np.abs(v - trailing.to_numpy())
        out[0] = 0.0
    else:
        raise ConfigError(f"unknown RQA score mode {mode!r}")
    return out


def rqa_baseline(
    series: TimeSeries,
    indicator: str,
    rp_epsilon: float,
    cfg: RadtdConfig,
    urps: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> ScoreSeries:
    col = _indicator_index(indicator)
    starts, stack = urps if urps is not None else urps_for_rqa(series, cfg)
    values = indicator_series(stack, rp_epsilon, cfg)[:, col]
    scores = difference_scores(values, cfg.rqa_score, cfg.median_window)
    ids = np.full(scores.shape, -1, dtype=np.int64)
    return ScoreSeries(starts, scores, ids, None, None, series.n, cfg.w, cfg.rqa_stride, series.name, f"rqa_{indicator.lower()}")


def _sweep_point(
    series: TimeSeries, urps: Tuple[np.ndarray, np.ndarray], eps: float, cfg: RadtdConfig
) -> np.ndarray:
    row = np.empty(len(INDICATORS), dtype=np.float64)
    for i, name in enumerate(INDICATORS):
        scored = rqa_baseline(series, name, eps, cfg, urps)
        row[i] = auc(scored.point_scores(), series.labels)
    return row


def threshold_sweep(
    series: TimeSeries,
    cfg: RadtdConfig,
    epsilons: Sequence[float] = SWEEP_EPSILONS,
    include_radtd: bool = True,
    jobs: int = 1,
    progress: bool = False,
) -> SweepResult:
    """AUC of every RQA indicator per recurrence threshold, plus the threshold-free RADTD AUC."""
    if series.labels is None:
        raise DataError(f"threshold sweep needs a labeled series ({series.name} has no label column)")
    grid = np.asarray(epsilons, dtype=np.float64)
    urps = urps_for_rqa(series, cfg)
    iterator = tqdm(grid, desc=f"sweep {series.name}", disable=not progress, leave=False)
    if jobs > 1:
        rows = Parallel(n_jobs=jobs, prefer="threads")(delayed(_sweep_point)(series, urps, float(e), cfg) for e in iterator)
    else:
        rows = [_sweep_point(series, urps, float(e), cfg) for e in iterator]
    table = np.vstack(rows) if rows else np.empty((0, len(INDICATORS)))

    radtd_auc = None
    if include_radtd:
        radtd_auc = auc(fit_detect(series, cfg, "urp", jobs).point_scores(), series.labels)

    result = SweepResult(grid, {name: table[:, i] for i, name in enumerate(INDICATORS)}, radtd_auc)
    best = result.best()
    logger.info(
        "[sweep] name=%s | thresholds=%d | %s | radtd=%s",
        series.name,
        grid.size,
        " | ".join(f"{k}={v[0]:.3f}@{v[1]:.1f}" for k, v in best.items()),
        "n/a" if radtd_auc is None else f"{radtd_auc:.3f}",
    )
    return result
