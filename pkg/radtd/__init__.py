"""Recurrence-plot anomaly detection with ELM autoencoders and a negative-selection self-set."""

__version__ = "0.1.0"

from .config import ColumnSchema, RadtdConfig, RunConfig, make_config
from .detector import ScoreSeries, auto_threshold, detect, fit, point_scores, score_urp
from .errors import ConfigError, DataError, NumericError, RadtdError
from .metrics import auc
from .self_set import Pattern, SelfSet, admit, load, save
from .series_core import TimeSeries, load_series, rescale, windows

__all__ = [
    "__version__",
    "ColumnSchema",
    "ConfigError",
    "DataError",
    "NumericError",
    "Pattern",
    "RadtdConfig",
    "RadtdError",
    "RunConfig",
    "ScoreSeries",
    "SelfSet",
    "TimeSeries",
    "admit",
    "auc",
    "auto_threshold",
    "detect",
    "fit",
    "load",
    "load_series",
    "make_config",
    "point_scores",
    "rescale",
    "save",
    "score_urp",
    "windows",
]
