from __future__ import annotations

import logging

import numpy as np
import pytest

from radtd import common
from radtd.config import make_config
from radtd.series_core import TimeSeries


@pytest.fixture(autouse=True)
def _reset_radtd_logging():
    yield
    logger = logging.getLogger("radtd")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.propagate = True
    logger.setLevel(logging.NOTSET)
    common._CONFIGURED = False


@pytest.fixture
def cfg():
    return make_config()


@pytest.fixture
def sine_series():
    rng = np.random.default_rng(7)
    t = np.arange(600, dtype=np.float64)
    values = np.sin(2 * np.pi * t / 40) + 0.02 * rng.standard_normal(t.size)
    return TimeSeries.from_values(values, labels=np.zeros(t.size, dtype=bool), name="sine")


@pytest.fixture
def spike_series(sine_series):
    values = np.array(sine_series.values[:, 0])
    values[420] += 10.0 * np.sqrt(2.0) * values.std()
    labels = np.zeros(values.size, dtype=bool)
    labels[420] = True
    return TimeSeries.from_values(values, labels=labels, name="spike")


def write_csv(path, values, labels=None, header="timestamp,value"):
    lines = [header + (",is_anomaly" if labels is not None else "")]
    for i, v in enumerate(values):
        row = f"{i},{v!r}"
        if labels is not None:
            row += f",{int(labels[i])}"
        lines.append(row)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
