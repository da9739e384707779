"""
RADTD detector: fit a self-set from a normal prefix, score subsequences by the
minimum reconstruction error over stored patterns, flag scores above epsilon.

Pipeline (fit):
    rescale -> windows(w, hop) -> URPs -> groups of k -> one ELM-AE per group
    -> admit into the self-set -> epsilon from held-out training scores (confidence mode)

The same pipeline with representation="raw" (windows fed to the ELM-AE as
plain vectors) is the ELM-AE baseline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm

from .common import derive_seed
from .config import FINGERPRINT_GEOMETRY_KEYS, RadtdConfig
from .elm_ae import train
from .errors import ConfigError, DataError, EmptySelfSetError, FingerprintError, InsufficientDataError, ShapeError
from .recurrence import EmbeddingConfig, RecurrenceMatrix, urp_stack
from .self_set import CONFIRMED, MAX_ERROR, UNLABELED, Pattern, SelfSet, admit, rbf_errors
from .series_core import TimeSeries, WindowPlan, apply_scaling, fit_scaling, split_prefix, windows

logger = logging.getLogger("radtd.detector")

Representation = Literal["urp", "raw"]

# rows per scoring chunk; keeps the (chunk, D) reconstruction small
SCORE_CHUNK = 4096
MIN_THRESHOLD_SCORES = 30


@dataclass(frozen=True)
class ScoreSeries:
    """Per-window scores plus the geometry needed to map them onto points."""

    starts: np.ndarray
    scores: np.ndarray
    pattern_ids: np.ndarray
    flags: Optional[np.ndarray]
    epsilon: Optional[float]
    n: int
    w: int
    hop: int = 1
    name: str = "series"
    method: str = "radtd"

    def __post_init__(self) -> None:
        starts = np.asarray(self.starts, dtype=np.int64)
        scores = np.asarray(self.scores, dtype=np.float64)
        ids = np.asarray(self.pattern_ids, dtype=np.int64)
        if not (starts.shape == scores.shape == ids.shape) or scores.ndim != 1:
            raise ShapeError(f"score series arrays disagree: {starts.shape}, {scores.shape}, {ids.shape}")
        flags = None if self.flags is None else np.asarray(self.flags, dtype=bool)
        if flags is not None and flags.shape != scores.shape:
            raise ShapeError("flags length != scores length")
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "pattern_ids", ids)
        object.__setattr__(self, "flags", flags)

    def __len__(self) -> int:
        return int(self.scores.shape[0])

    def point_scores(self) -> np.ndarray:
        return point_scores(self.scores, self.n, self.w, self.hop)

    def point_flags(self) -> Optional[np.ndarray]:
        if self.flags is None:
            return None
        return point_scores(self.flags.astype(np.float64), self.n, self.w, self.hop) > 0.0

    @classmethod
    def empty(cls, n: int, w: int, hop: int, name: str, method: str, epsilon: Optional[float]) -> "ScoreSeries":
        z = np.zeros(0)
        flags = None if epsilon is None else np.zeros(0, dtype=bool)
        return cls(z.astype(np.int64), z, z.astype(np.int64), flags, epsilon, n, w, hop, name, method)


# ----------------------------------------------------------------------------
# scoring primitives
# ----------------------------------------------------------------------------

def recon_error(R: np.ndarray, R_hat: np.ndarray) -> float:
    """1 - exp(-||R - R_hat||_F / 2)."""
    if isinstance(R, RecurrenceMatrix):
        R = R.entries
    R = np.asarray(R, dtype=np.float64)
    R_hat = np.asarray(R_hat, dtype=np.float64)
    if R.shape != R_hat.shape:
        raise ShapeError(f"shape mismatch: {R.shape} vs {R_hat.shape}")
    return float(rbf_errors(R.reshape(1, -1), R_hat.reshape(1, -1))[0])


def _require_patterns(selfset: SelfSet) -> None:
    if not selfset.patterns:
        raise EmptySelfSetError("no learned patterns")


def score_batch(selfset: SelfSet, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Minimum error over patterns for each row of X, and the lowest index attaining it."""
    _require_patterns(selfset)
    errors = selfset.error_matrix(X)
    ids = np.argmin(errors, axis=0)
    return errors[ids, np.arange(errors.shape[1])], ids.astype(np.int64)


def score_urp(selfset: SelfSet, R: RecurrenceMatrix) -> Tuple[float, int]:
    _require_patterns(selfset)
    entries = R.entries if isinstance(R, RecurrenceMatrix) else np.asarray(R, dtype=np.float64)
    D = int(selfset.fingerprint.get("feature_length", entries.size))
    if entries.size != D:
        raise FingerprintError(f"URP has {entries.size} entries, self-set expects {D}")
    scores, ids = score_batch(selfset, entries.reshape(1, -1))
    return float(scores[0]), int(ids[0])


def features(segments: np.ndarray, cfg: RadtdConfig, representation: Representation = "urp") -> np.ndarray:
    """(T, w, d) windows -> (T, D) rows fed to the ELM-AE."""
    if representation == "urp":
        stack = urp_stack(segments, EmbeddingConfig(cfg.m, cfg.tau))
        return stack.reshape(stack.shape[0], -1)
    if representation == "raw":
        return np.asarray(segments, dtype=np.float64).reshape(segments.shape[0], -1)
    raise ConfigError(f"unknown representation {representation!r}")


def auto_threshold(scores: Sequence[float], confidence: float) -> float:
    arr = np.asarray(scores, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DataError("cannot derive a threshold from zero scores")
    if not 0.0 < confidence < 1.0:
        raise ConfigError(f"confidence must be in (0, 1) (got {confidence})")
    if arr.size < MIN_THRESHOLD_SCORES:
        logger.warning("[threshold] only %d scores (>= %d recommended)", arr.size, MIN_THRESHOLD_SCORES)
    mean = float(arr.mean())
    std = float(arr.std())
    if std <= 1e-12 * max(1.0, abs(mean)):
        eps = mean + 1e-6
    else:
        eps = mean + float(norm.ppf(confidence)) * std
    return float(min(max(eps, 0.0), MAX_ERROR))


def point_scores(window_scores: Sequence[float], N: int, w: int, hop: int = 1) -> np.ndarray:
    """Each point takes the maximum score of the windows covering it; uncovered points get 0."""
    scores = np.asarray(window_scores, dtype=np.float64).reshape(-1)
    out = np.zeros(int(N), dtype=np.float64)
    if scores.size == 0 or N == 0:
        return out
    idx = (np.arange(scores.size, dtype=np.int64) * hop)[:, None] + np.arange(w, dtype=np.int64)[None, :]
    vals = np.broadcast_to(scores[:, None], idx.shape)
    keep = idx < N
    np.maximum.at(out, idx[keep], vals[keep])
    return out


# ----------------------------------------------------------------------------
# fit
# ----------------------------------------------------------------------------

def _prepare(series: TimeSeries, cfg: RadtdConfig, representation: Representation, scaling=None):
    stats = scaling if scaling is not None else fit_scaling(series)
    scaled = apply_scaling(series, stats)
    wins = windows(scaled, WindowPlan(cfg.w, cfg.hop))
    return stats, wins, features(wins.segments, cfg, representation)


def _train_candidates(
    X: np.ndarray, starts: np.ndarray, cfg: RadtdConfig, seed_keys: Tuple, label: str = UNLABELED
) -> List[Tuple[Pattern, np.ndarray]]:
    out: List[Tuple[Pattern, np.ndarray]] = []
    for j in range(X.shape[0] // cfg.k):
        rows = slice(j * cfg.k, (j + 1) * cfg.k)
        batch = X[rows]
        seed = derive_seed(cfg.seed, *seed_keys, j)
        params = train(batch, cfg.L, cfg.C, seed, cfg.activation)
        origin = (int(starts[rows][0]), int(starts[rows][-1]) + cfg.w)
        pattern = Pattern(params, origin, label)
        probe = float(pattern.errors(batch).mean())
        out.append((replace(pattern, probe_error=probe), batch))
    return out


def held_out_scores(selfset: SelfSet, X: np.ndarray, own: np.ndarray) -> np.ndarray:
    """
    Training scores with each window's own pattern left out, so they behave like
    scores of unseen normal data. A window whose pattern is the only one keeps
    its in-sample score.
    """
    errors = selfset.error_matrix(X)
    in_sample = errors.min(axis=0)
    rows = np.flatnonzero(own >= 0)
    errors[own[rows], rows] = np.inf
    held = errors.min(axis=0)
    return np.where(np.isfinite(held), held, in_sample)


def calibrate_epsilon(scores: np.ndarray, n: int, cfg: RadtdConfig) -> float:
    """
    Confidence-mode threshold: the normal-quantile rule over the scores, raised when
    needed so that at most 1 - confidence of the training points end up flagged
    once window scores are spread over the points they cover.
    """
    eps = auto_threshold(scores, cfg.confidence)
    points = point_scores(scores, n, cfg.w, cfg.hop)
    eps_points = float(np.quantile(points, cfg.confidence, method="higher"))
    if eps_points > eps:
        logger.debug("[threshold] raising epsilon %.6f -> %.6f for the point flag rate", eps, eps_points)
    return float(min(max(eps, eps_points), MAX_ERROR))


def _merge_threshold(cfg: RadtdConfig, probe_errors: Sequence[float]) -> float:
    if cfg.merge_epsilon is not None:
        return float(cfg.merge_epsilon)
    if cfg.epsilon is not None:
        return float(cfg.epsilon)
    return auto_threshold(probe_errors, cfg.confidence)


def fit(
    series: TimeSeries,
    cfg: RadtdConfig,
    representation: Representation = "urp",
    label: str = UNLABELED,
) -> SelfSet:
    """Learn a self-set from a series assumed normal; all columns are fitted jointly."""
    need = cfg.w + (cfg.k - 1) * cfg.hop
    if series.n < need:
        raise InsufficientDataError(
            f"series shorter than window plus batch (N={series.n}, need >= {need} for w={cfg.w}, k={cfg.k}, hop={cfg.hop})"
        )
    if label not in (UNLABELED, CONFIRMED):
        raise ConfigError(f"unknown pattern label {label!r}")

    stats, wins, X = _prepare(series, cfg, representation)
    T = X.shape[0]
    n_batches, remainder = divmod(T, cfg.k)
    if remainder:
        logger.warning("[fit] dropping %d trailing window(s) that do not fill a batch of k=%d", remainder, cfg.k)

    candidates = _train_candidates(X, wins.starts, cfg, (), label)
    merge_eps = _merge_threshold(cfg, [p.probe_error for p, _ in candidates])

    fingerprint = cfg.fingerprint(representation, series.columns, X.shape[1])
    selfset = SelfSet(fingerprint=fingerprint, epsilon=merge_eps, scaling=stats)
    # own[t]: index of the pattern trained on window t, -1 when its batch merged or was dropped
    own = np.full(T, -1, dtype=np.int64)
    for j, (pattern, batch) in enumerate(candidates):
        before = len(selfset)
        selfset = admit(selfset, pattern, batch)
        if len(selfset) > before:
            own[j * cfg.k : (j + 1) * cfg.k] = before

    if cfg.epsilon is not None:
        eps = float(cfg.epsilon)
    else:
        eps = calibrate_epsilon(held_out_scores(selfset, X, own), series.n, cfg)
    selfset = selfset.with_epsilon(eps)

    logger.info(
        "[fit] name=%s | repr=%s | windows=%d | batches=%d | patterns=%d | epsilon=%.6f",
        series.name,
        representation,
        T,
        n_batches,
        len(selfset),
        eps,
    )
    return selfset


# ----------------------------------------------------------------------------
# detect
# ----------------------------------------------------------------------------

def check_fingerprint(selfset: SelfSet, cfg: RadtdConfig, columns: Optional[Sequence[str]] = None) -> None:
    fp = selfset.fingerprint
    expected = cfg.fingerprint(fp.get("representation", "urp"), tuple(fp.get("channels", ())), fp.get("feature_length"))
    diffs = [k for k in FINGERPRINT_GEOMETRY_KEYS if fp.get(k) != expected[k]]
    if diffs:
        detail = ", ".join(f"{k}: model={fp.get(k)!r} config={expected[k]!r}" for k in diffs)
        raise FingerprintError(f"self-set fingerprint does not match config ({detail})")
    if columns is not None and list(columns) != list(fp.get("channels", ())):
        raise FingerprintError(f"self-set was fitted on columns {fp.get('channels')}, series has {list(columns)}")


def _score_rows(selfset: SelfSet, X: np.ndarray, jobs: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    if X.shape[0] <= SCORE_CHUNK or jobs <= 1:
        chunks = [X[i : i + SCORE_CHUNK] for i in range(0, max(X.shape[0], 1), SCORE_CHUNK)]
        parts = [score_batch(selfset, c) for c in chunks]
    else:
        chunks = [X[i : i + SCORE_CHUNK] for i in range(0, X.shape[0], SCORE_CHUNK)]
        parts = Parallel(n_jobs=jobs, prefer="threads")(delayed(score_batch)(selfset, c) for c in chunks)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def detect(
    selfset: SelfSet,
    series: TimeSeries,
    cfg: RadtdConfig,
    jobs: int = 1,
    method: str = "radtd",
) -> ScoreSeries:
    _require_patterns(selfset)
    check_fingerprint(selfset, cfg, series.columns)
    eps = float(cfg.epsilon) if cfg.epsilon is not None else float(selfset.epsilon)
    if series.n < cfg.w:
        logger.warning("[detect] series %s shorter than window (N=%d, w=%d); no scores", series.name, series.n, cfg.w)
        return ScoreSeries.empty(series.n, cfg.w, cfg.hop, series.name, method, eps)
    if selfset.scaling is None:
        logger.warning("[detect] self-set carries no scaling bounds; rescaling %s by its own range", series.name)
    representation = selfset.fingerprint.get("representation", "urp")
    _, wins, X = _prepare(series, cfg, representation, selfset.scaling)
    if X.shape[1] != selfset.patterns[0].params.D:
        raise FingerprintError(f"features have length {X.shape[1]}, self-set expects {selfset.patterns[0].params.D}")

    scores, ids = _score_rows(selfset, X, jobs)
    flags = scores > eps
    logger.info(
        "[detect] name=%s | windows=%d | flagged=%d | epsilon=%.6f", series.name, scores.size, int(flags.sum()), eps
    )
    return ScoreSeries(wins.starts, scores, ids, flags, eps, series.n, cfg.w, cfg.hop, series.name, method)


def update_self_set(selfset: SelfSet, series: TimeSeries, scores: ScoreSeries, cfg: RadtdConfig) -> SelfSet:
    """
    Grow the self-set from newly observed data: runs of at least k consecutive
    non-flagged windows are batched, trained and offered to `admit`.
    """
    _require_patterns(selfset)
    if scores.flags is None or len(scores) == 0:
        return selfset
    representation = selfset.fingerprint.get("representation", "urp")
    _, wins, X = _prepare(series, cfg, representation, selfset.scaling)
    if X.shape[0] != len(scores):
        raise ShapeError(f"score series has {len(scores)} windows, series yields {X.shape[0]}")

    merge_eps = float(cfg.merge_epsilon) if cfg.merge_epsilon is not None else float(selfset.epsilon)
    working = selfset.with_epsilon(merge_eps)
    normal = ~scores.flags
    # run boundaries of consecutive normal windows
    edges = np.flatnonzero(np.diff(np.concatenate([[0], normal.astype(np.int8), [0]])))
    before = len(working)
    for run_start, run_stop in zip(edges[::2], edges[1::2]):
        if run_stop - run_start < cfg.k:
            continue
        rows = slice(run_start, run_stop)
        for pattern, batch in _train_candidates(X[rows], wins.starts[rows], cfg, ("update", int(run_start))):
            working = admit(working, pattern, batch)
    logger.info("[update] name=%s | admitted=%d | patterns=%d", series.name, len(working) - before, len(working))
    return working.with_epsilon(selfset.epsilon)


# ----------------------------------------------------------------------------
# per-channel helpers and the train-prefix pipeline
# ----------------------------------------------------------------------------

def fit_channels(
    series: TimeSeries, cfg: RadtdConfig, representation: Representation = "urp", label: str = UNLABELED
) -> Dict[str, SelfSet]:
    """One self-set per value column."""
    return {col: fit(series.channel(i), cfg, representation, label) for i, col in enumerate(series.columns)}


def detect_channels(
    sets: Dict[str, SelfSet], series: TimeSeries, cfg: RadtdConfig, jobs: int = 1, method: str = "radtd"
) -> Dict[str, ScoreSeries]:
    out: Dict[str, ScoreSeries] = {}
    for col, selfset in sets.items():
        if col not in series.columns:
            raise FingerprintError(f"series has no column {col!r} (columns: {list(series.columns)})")
        out[col] = detect(selfset, series.channel(series.columns.index(col)), cfg, jobs, method)
    return out


def combine_channels(per_channel: Dict[str, ScoreSeries]) -> ScoreSeries:
    """Window-wise maximum across channels; a window is flagged when any channel flags it."""
    items = list(per_channel.values())
    if not items:
        raise DataError("no channel scores to combine")
    if len(items) == 1:
        return items[0]
    first = items[0]
    stacked = np.stack([s.scores for s in items])
    best = np.argmax(stacked, axis=0)
    cols = np.arange(stacked.shape[1])
    ids = np.stack([s.pattern_ids for s in items])[best, cols]
    flags = None
    if all(s.flags is not None for s in items):
        flags = np.any(np.stack([s.flags for s in items]), axis=0)
    name = first.name.split(":", 1)[0]
    return ScoreSeries(first.starts, stacked[best, cols], ids, flags, None, first.n, first.w, first.hop, name, first.method)


def fit_detect(
    series: TimeSeries,
    cfg: RadtdConfig,
    representation: Representation = "urp",
    jobs: int = 1,
    training: Optional[TimeSeries] = None,
) -> ScoreSeries:
    """Fit on a training prefix (default `train_fraction` of the series) and score the whole series."""
    method = "radtd" if representation == "urp" else "elmae"
    if training is None:
        training, _ = split_prefix(series, cfg.train_fraction, cfg.w + (cfg.k - 1) * cfg.hop)
    if series.d > 1 and not cfg.joint:
        sets = fit_channels(training, cfg, representation)
        return combine_channels(detect_channels(sets, series, cfg, jobs, method))
    return detect(fit(training, cfg, representation), series, cfg, jobs, method)

