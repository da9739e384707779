"""
Phase-space embedding, unthresholded recurrence plots (URPs), thresholded
recurrence plots and the RR / DET / LAM indicators.

Phase vectors of a window z_0..z_{w-1} are
    D_j = (z_j, z_{j+tau}, ..., z_{j+(m-1)tau}),  j = 1 .. w-1-(m-1)tau
so the first observation of a window never starts a phase vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

import numpy as np
from PIL import Image
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigError, ShapeError

logger = logging.getLogger("radtd.recurrence")

INDICATORS = ("RR", "DET", "LAM")


@dataclass(frozen=True)
class EmbeddingConfig:
    m: int = 1
    tau: int = 1

    def __post_init__(self) -> None:
        if self.m < 1 or self.tau < 1:
            raise ConfigError(f"m and tau must be >= 1 (got m={self.m}, tau={self.tau})")

    def phase_count(self, w: int) -> int:
        return w - 1 - (self.m - 1) * self.tau

    def check_window(self, w: int) -> int:
        n = self.phase_count(w)
        if n < 2:
            raise ConfigError(
                f"window too short for embedding: w={w}, m={self.m}, tau={self.tau} gives {n} phase vectors"
            )
        return n


@dataclass(frozen=True)
class RecurrenceMatrix:
    entries: np.ndarray
    origin: int = 0

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    def flatten(self) -> np.ndarray:
        # row-major, D = n*n
        return self.entries.reshape(-1)


@dataclass(frozen=True)
class BinaryRecurrenceMatrix:
    entries: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class RqaIndicators:
    rr: float
    det: float
    lam: float

    def as_dict(self) -> Dict[str, float]:
        return {"RR": self.rr, "DET": self.det, "LAM": self.lam}


def _as_2d(subseq: np.ndarray) -> np.ndarray:
    arr = np.asarray(subseq, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeError(f"subsequence must be (w,) or (w, d), got {arr.shape}")
    return arr


def embed(subseq: np.ndarray, cfg: EmbeddingConfig) -> np.ndarray:
    """(w, d) window -> (n, m*d) phase vectors."""
    z = _as_2d(subseq)
    w = z.shape[0]
    n = cfg.check_window(w)
    offsets = 1 + np.arange(n)[:, None] + cfg.tau * np.arange(cfg.m)[None, :]
    return z[offsets].reshape(n, cfg.m * z.shape[1])


def urp(subseq: np.ndarray, cfg: EmbeddingConfig, origin: int = 0) -> RecurrenceMatrix:
    phase = embed(subseq, cfg)
    return RecurrenceMatrix(squareform(pdist(phase, metric="euclidean")), origin)


def urp_stack(segments: np.ndarray, cfg: EmbeddingConfig) -> np.ndarray:
    """(T, w, d) windows -> (T, n, n) URPs, same values as `urp` per window."""
    seg = np.asarray(segments, dtype=np.float64)
    if seg.ndim == 2:
        seg = seg[:, :, None]
    if seg.ndim != 3:
        raise ShapeError(f"segments must be (T, w) or (T, w, d), got {seg.shape}")
    t_count, w, d = seg.shape
    n = cfg.check_window(w)
    offsets = 1 + np.arange(n)[:, None] + cfg.tau * np.arange(cfg.m)[None, :]
    phase = seg[:, offsets, :].reshape(t_count, n, cfg.m * d)
    diff = phase[:, :, None, :] - phase[:, None, :, :]
    return np.sqrt(np.einsum("tijk,tijk->tij", diff, diff))


def threshold_rp(rm: Union[RecurrenceMatrix, np.ndarray], epsilon: float) -> BinaryRecurrenceMatrix:
    if epsilon < 0:
        raise ConfigError(f"RP threshold must be >= 0 (got {epsilon})")
    entries = rm.entries if isinstance(rm, RecurrenceMatrix) else np.asarray(rm)
    return BinaryRecurrenceMatrix(entries <= epsilon, float(epsilon))


# ----------------------------------------------------------------------------
# RQA
# ----------------------------------------------------------------------------

def _diagonal_run_lengths(b: np.ndarray) -> np.ndarray:
    """Length of the diagonal (i+1, j+1 direction) run each point sits on; 0 off the plot."""
    n = b.shape[-1]
    bi = b.astype(np.int64)
    fwd = bi.copy()
    for i in range(1, n):
        fwd[..., i, 1:] = (fwd[..., i - 1, :-1] + 1) * bi[..., i, 1:]
    bwd = bi.copy()
    for i in range(n - 2, -1, -1):
        bwd[..., i, :-1] = (bwd[..., i + 1, 1:] + 1) * bi[..., i, :-1]
    return np.where(b, fwd + bwd - 1, 0)


def _vertical_run_lengths(b: np.ndarray) -> np.ndarray:
    n = b.shape[-1]
    bi = b.astype(np.int64)
    fwd = bi.copy()
    for i in range(1, n):
        fwd[..., i, :] = (fwd[..., i - 1, :] + 1) * bi[..., i, :]
    bwd = bi.copy()
    for i in range(n - 2, -1, -1):
        bwd[..., i, :] = (bwd[..., i + 1, :] + 1) * bi[..., i, :]
    return np.where(b, fwd + bwd - 1, 0)


def rqa_stack(binary: np.ndarray, l_min: int = 2, v_min: int = 2) -> np.ndarray:
    """
    RR, DET, LAM for a stack of binary matrices (..., n, n) -> (..., 3).

    The line of identity counts toward RR and is excluded from DET.
    DET is 0 without off-diagonal recurrences, LAM is 0 without recurrences.
    """
    if l_min < 2 or v_min < 2:
        raise ConfigError("l_min and v_min must be >= 2")
    b = np.asarray(binary, dtype=bool)
    if b.ndim < 2 or b.shape[-1] != b.shape[-2]:
        raise ShapeError(f"binary recurrence matrices must be square, got {b.shape}")
    n = b.shape[-1]
    off_diag = ~np.eye(n, dtype=bool)

    total = b.sum(axis=(-2, -1))
    rr = total / float(n * n)

    diag_len = _diagonal_run_lengths(b)
    off_points = (b & off_diag).sum(axis=(-2, -1))
    on_lines = ((diag_len >= l_min) & off_diag).sum(axis=(-2, -1))
    det = np.divide(on_lines, off_points, out=np.zeros(rr.shape, dtype=np.float64), where=off_points > 0)

    vert_len = _vertical_run_lengths(b)
    on_vert = (vert_len >= v_min).sum(axis=(-2, -1))
    lam = np.divide(on_vert, total, out=np.zeros(rr.shape, dtype=np.float64), where=total > 0)

    return np.stack([rr, det, lam], axis=-1)


def rqa_indicators(bin_rp: Union[BinaryRecurrenceMatrix, np.ndarray], l_min: int = 2, v_min: int = 2) -> RqaIndicators:
    entries = bin_rp.entries if isinstance(bin_rp, BinaryRecurrenceMatrix) else np.asarray(bin_rp, dtype=bool)
    rr, det, lam = rqa_stack(entries, l_min, v_min)
    return RqaIndicators(float(rr), float(det), float(lam))


# ----------------------------------------------------------------------------
# export
# ----------------------------------------------------------------------------

def save_urp_csv(rm: RecurrenceMatrix, path: Path) -> None:
    np.savetxt(path, rm.entries, delimiter=",", fmt="%.17g")


def load_urp_csv(path: Path, origin: int = 0) -> RecurrenceMatrix:
    entries = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return RecurrenceMatrix(entries, origin)


def urp_to_image(rm: RecurrenceMatrix) -> Image.Image:
    """Affine map of entries onto 0..255 (all-equal matrices render black)."""
    e = rm.entries
    lo, hi = float(e.min()), float(e.max())
    if hi > lo:
        scaled = np.rint((e - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(e)
    return Image.fromarray(scaled.astype(np.uint8))


def save_urp_pgm(rm: RecurrenceMatrix, path: Path) -> None:
    # Pillow writes mode "L" images as binary PGM (P5)
    urp_to_image(rm).save(path, format="PPM")
