from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DataError, ShapeError, UndefinedAucError


def auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """
    Rank (Mann-Whitney) AUC: P(anomalous score > normal score) + 0.5 * P(tie).
    Average ranks make every tie contribute exactly one half.
    """
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=bool).reshape(-1)
    if s.shape != y.shape:
        raise ShapeError(f"scores ({s.size}) and labels ({y.size}) differ in length")
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAucError("AUC undefined: labels contain a single class")
    ranks = rankdata(s, method="average")
    u = float(ranks[y].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def has_both_classes(labels: Sequence[bool]) -> bool:
    y = np.asarray(labels, dtype=bool)
    return bool(y.any()) and not bool(y.all())
