"""
Labeled synthetic series for tests, demos and the benchmark smoke suite.

kinds:
    spike            sine + noise, single-point spikes
    level_shift      sine + noise, a block offset by a constant
    ar1_spike        AR(1) noise around a sine, single-point spikes
    seasonal_switch  two normal sine regimes alternating; nothing is labeled
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .series_core import TimeSeries

Kind = Literal["spike", "level_shift", "ar1_spike", "seasonal_switch"]
KINDS: Tuple[str, ...] = ("spike", "level_shift", "ar1_spike", "seasonal_switch")
MIN_LENGTH = 100


@dataclass(frozen=True)
class AnomalySpec:
    positions: Optional[Tuple[int, ...]] = None
    count: int = 1
    magnitude: float = 10.0
    width: int = 30
    period: int = 50
    noise: float = 0.05
    regime_length: int = 100


def _positions(spec: AnomalySpec, length: int, width: int, rng: np.random.Generator) -> Tuple[int, ...]:
    if spec.positions is not None:
        pos = tuple(int(p) for p in spec.positions)
        bad = [p for p in pos if p < 0 or p + width > length]
        if bad:
            raise ConfigError(f"anomaly positions out of range for length {length}: {bad}")
        return pos
    # after the default training prefix so fitted models see a clean start
    lo, hi = int(0.4 * length), length - width
    if spec.count < 1 or spec.count > hi - lo:
        raise ConfigError(
            f"anomaly positions out of range for length {length}: count={spec.count}, room for {max(hi - lo, 0)}"
        )
    return tuple(sorted(int(p) for p in rng.choice(np.arange(lo, hi), size=spec.count, replace=False)))


def synth_series(kind: str, length: int = 500, spec: Optional[AnomalySpec] = None, seed: int = 0) -> TimeSeries:
    if kind not in KINDS:
        raise ConfigError(f"unknown synthetic kind {kind!r} (choose from {list(KINDS)})")
    if length < MIN_LENGTH:
        raise ConfigError(f"synthetic series need length >= {MIN_LENGTH} (got {length})")
    spec = spec or AnomalySpec()
    if spec.period < 2 or spec.width < 1 or spec.regime_length < 1:
        raise ConfigError("period must be >= 2, width and regime_length >= 1")
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)
    labels = np.zeros(length, dtype=bool)

    if kind == "seasonal_switch":
        regime = (np.arange(length) // spec.regime_length) % 2
        slow = np.sin(2 * np.pi * t / spec.period)
        fast = 0.5 * np.sin(2 * np.pi * t / (spec.period / 2))
        values = np.where(regime == 0, slow, fast) + spec.noise * rng.standard_normal(length)
        return TimeSeries(np.arange(length), values, labels, f"{kind}_{seed}", ("value",))

    base = np.sin(2 * np.pi * t / spec.period)
    if kind == "ar1_spike":
        innov = 0.1 * rng.standard_normal(length)
        ar = np.zeros(length)
        for i in range(1, length):
            ar[i] = 0.8 * ar[i - 1] + innov[i]
        values = base + ar
    else:
        values = base + spec.noise * rng.standard_normal(length)

    if kind == "level_shift":
        for p in _positions(spec, length, spec.width, rng):
            values[p : p + spec.width] += spec.magnitude * 0.3
            labels[p : p + spec.width] = True
    else:
        amplitude = float(np.std(values)) * np.sqrt(2.0)
        for p in _positions(spec, length, 1, rng):
            values[p] += spec.magnitude * amplitude
            labels[p] = True

    return TimeSeries(np.arange(length), values, labels, f"{kind}_{seed}", ("value",))
