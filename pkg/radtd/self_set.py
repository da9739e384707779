"""
Self-set: the stored normal patterns (ELM parameter sets) and threshold epsilon.

A candidate pattern joins the set only when no stored pattern already explains
its own training batch, i.e. the smallest mean reconstruction error of that
batch under the stored patterns is above epsilon. Confirmed-normal patterns
skip the check.

File layout (`*.selfset.json`):
    {version, fingerprint, epsilon, scaling, patterns: [{a, b, beta, origin, label, ...}], checksum}
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

import numpy as np

from .common import sha256_text, stable_settings_hash, write_json_atomic
from .elm_ae import ElmParams, reconstruct
from .errors import ConfigError, FingerprintError, FormatError, FormatVersionError, IntegrityError, ShapeError
from .series_core import ScalingStats

logger = logging.getLogger("radtd.self_set")

FORMAT_VERSION = 1
SELFSET_SUFFIX = ".selfset.json"

UNLABELED = "unlabeled-normal"
CONFIRMED = "confirmed-normal"
PatternLabel = Literal["unlabeled-normal", "confirmed-normal"]

# largest error below 1; keeps scores in [0, 1) for very distant reconstructions
MAX_ERROR = float(np.nextafter(1.0, 0.0))


def rbf_errors(X: np.ndarray, X_hat: np.ndarray) -> np.ndarray:
    """Row-wise 1 - exp(-||x - x_hat|| / 2) with the unsquared Euclidean norm."""
    X = np.asarray(X, dtype=np.float64)
    X_hat = np.asarray(X_hat, dtype=np.float64)
    if X.shape != X_hat.shape:
        raise ShapeError(f"shape mismatch: {X.shape} vs {X_hat.shape}")
    if X.ndim == 1:
        X, X_hat = X[None, :], X_hat[None, :]
    dist = np.linalg.norm(X - X_hat, axis=1)
    return np.minimum(-np.expm1(-dist / 2.0), MAX_ERROR)


@dataclass(frozen=True)
class Pattern:
    params: ElmParams
    origin: Tuple[int, int]
    label: PatternLabel = UNLABELED
    probe_error: float = math.nan

    def __post_init__(self) -> None:
        origin = tuple(int(v) for v in self.origin)
        if len(origin) != 2 or origin[1] < origin[0]:
            raise ConfigError(f"pattern origin must be a (start, stop) range, got {self.origin}")
        if self.label not in (UNLABELED, CONFIRMED):
            raise ConfigError(f"unknown pattern label {self.label!r}")
        object.__setattr__(self, "origin", origin)

    def errors(self, X: np.ndarray) -> np.ndarray:
        return rbf_errors(X, reconstruct(self.params, X))


@dataclass(frozen=True)
class SelfSet:
    fingerprint: Dict[str, Any]
    epsilon: float
    patterns: Tuple[Pattern, ...] = ()
    scaling: Optional[ScalingStats] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "patterns", tuple(self.patterns))
        if not 0.0 <= float(self.epsilon) < 1.0:
            raise ConfigError(f"self-set epsilon must be in [0, 1) (got {self.epsilon})")
        shapes = {(p.params.D, p.params.L) for p in self.patterns}
        if len(shapes) > 1:
            raise FingerprintError(f"patterns disagree on (D, L): {sorted(shapes)}")

    def __len__(self) -> int:
        return len(self.patterns)

    @property
    def channels(self) -> Tuple[str, ...]:
        return tuple(self.fingerprint.get("channels", ()))

    def with_epsilon(self, epsilon: float) -> "SelfSet":
        return replace(self, epsilon=float(epsilon))

    def error_matrix(self, X: np.ndarray) -> np.ndarray:
        """(patterns, rows) reconstruction errors."""
        if not self.patterns:
            return np.empty((0, np.atleast_2d(X).shape[0]))
        return np.stack([p.errors(X) for p in self.patterns])


def check_compatible(selfset: SelfSet, candidate: Pattern) -> None:
    fp = selfset.fingerprint
    expected = (int(fp["feature_length"]), int(fp["L"]))
    got = (candidate.params.D, candidate.params.L)
    if got != expected:
        raise FingerprintError(f"candidate (D, L)={got} does not match self-set fingerprint {expected}")
    if not math.isclose(float(fp["C"]), candidate.params.C) or fp.get("activation", "sigmoid") != candidate.params.activation:
        raise FingerprintError("candidate C/activation do not match self-set fingerprint")


def admit(selfset: SelfSet, candidate: Pattern, probe: np.ndarray) -> SelfSet:
    check_compatible(selfset, candidate)
    if candidate.label == CONFIRMED or not selfset.patterns:
        return replace(selfset, patterns=selfset.patterns + (candidate,))
    best = float(selfset.error_matrix(probe).mean(axis=1).min())
    if best > selfset.epsilon:
        logger.debug("[admit] origin=%s | best_error=%.6f > epsilon=%.6f | admitted", candidate.origin, best, selfset.epsilon)
        return replace(selfset, patterns=selfset.patterns + (candidate,))
    logger.debug("[admit] origin=%s | best_error=%.6f <= epsilon=%.6f | merged", candidate.origin, best, selfset.epsilon)
    return selfset


# ----------------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------------

def _pattern_to_dict(p: Pattern) -> Dict[str, Any]:
    return {
        "a": p.params.a.tolist(),
        "b": p.params.b.tolist(),
        "beta": p.params.beta.tolist(),
        "C": p.params.C,
        "activation": p.params.activation,
        "seed": p.params.seed,
        "origin": list(p.origin),
        "label": p.label,
        "probe_error": None if math.isnan(p.probe_error) else p.probe_error,
    }


def _pattern_from_dict(d: Dict[str, Any]) -> Pattern:
    params = ElmParams(
        a=np.asarray(d["a"], dtype=np.float64),
        b=np.asarray(d["b"], dtype=np.float64),
        beta=np.asarray(d["beta"], dtype=np.float64),
        C=float(d["C"]),
        activation=str(d.get("activation", "sigmoid")),
        seed=int(d.get("seed", 0)),
    )
    params.check()
    probe = d.get("probe_error")
    return Pattern(params, tuple(d["origin"]), d.get("label", UNLABELED), math.nan if probe is None else float(probe))


def to_payload(selfset: SelfSet) -> Dict[str, Any]:
    body = {
        "version": FORMAT_VERSION,
        "fingerprint": selfset.fingerprint,
        "settings_hash": stable_settings_hash(selfset.fingerprint),
        "epsilon": selfset.epsilon,
        "scaling": None if selfset.scaling is None else selfset.scaling.to_dict(),
        "patterns": [_pattern_to_dict(p) for p in selfset.patterns],
    }
    body["checksum"] = _checksum(body)
    return body


def _checksum(body: Dict[str, Any]) -> str:
    canon = {k: v for k, v in body.items() if k != "checksum"}
    return sha256_text(json.dumps(canon, sort_keys=True, separators=(",", ":")))


def from_payload(payload: Any) -> SelfSet:
    if not isinstance(payload, dict):
        raise FormatError("self-set payload must be a JSON object")
    version = payload.get("version")
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"unsupported self-set format version {version!r} (expected {FORMAT_VERSION})")
    checksum = payload.get("checksum")
    if checksum is None or checksum != _checksum(payload):
        raise IntegrityError("self-set checksum mismatch (file corrupted or edited)")
    try:
        scaling = payload.get("scaling")
        return SelfSet(
            fingerprint=dict(payload["fingerprint"]),
            epsilon=float(payload["epsilon"]),
            patterns=tuple(_pattern_from_dict(p) for p in payload["patterns"]),
            scaling=None if scaling is None else ScalingStats.from_dict(scaling),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed self-set payload: {exc}") from exc


def save(selfset: SelfSet, path: Union[str, Path]) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    write_json_atomic(p, to_payload(selfset))
    logger.info("[self_set] wrote: %s | patterns=%d | epsilon=%.6f", p, len(selfset), selfset.epsilon)
    return p


def load(path: Union[str, Path]) -> SelfSet:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"Missing self-set: {p.resolve()}")
    text = p.read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"self-set file is truncated or not JSON: {p} ({exc.msg})") from exc
    return from_payload(payload)


def channel_path(path: Union[str, Path], channel: str) -> Path:
    """model.selfset.json + 'v1' -> model.v1.selfset.json"""
    p = Path(path)
    name = p.name
    stem = name[: -len(SELFSET_SUFFIX)] if name.endswith(SELFSET_SUFFIX) else p.stem
    return p.with_name(f"{stem}.{channel}{SELFSET_SUFFIX}")
