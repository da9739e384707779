"""
Extreme-learning-machine autoencoder.

Input weights `a` (L x D) have orthonormal rows and the bias vector `b` has unit
norm; both are drawn from a seeded generator and never trained. Output weights
solve the ridge normal equations (I/C + H^T H) beta = H^T X with the batch X as
its own target.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np
import scipy.linalg as la
from scipy.special import expit

from .errors import ConfigError, DataError, NumericError, ShapeError

logger = logging.getLogger("radtd.elm_ae")


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


ACTIVATIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sigmoid": expit,
    "tanh": np.tanh,
    "sin": np.sin,
    "relu": _relu,
}


def get_activation(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ConfigError(f"unknown activation {name!r} (choose from {sorted(ACTIVATIONS)})") from None


@dataclass(frozen=True)
class ElmParams:
    a: np.ndarray
    b: np.ndarray
    beta: np.ndarray
    C: float
    activation: str = "sigmoid"
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("a", "b", "beta"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.a.ndim != 2 or self.b.shape != (self.a.shape[0],) or self.beta.shape != self.a.shape:
            raise ShapeError(
                f"inconsistent ELM shapes: a={self.a.shape}, b={self.b.shape}, beta={self.beta.shape}"
            )

    @property
    def L(self) -> int:
        return int(self.a.shape[0])

    @property
    def D(self) -> int:
        return int(self.a.shape[1])

    def check(self, tol: float = 1e-10) -> None:
        """Raise unless a has orthonormal rows, |b| = 1 and everything is finite."""
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.beta))):
            raise NumericError("ELM parameters contain non-finite entries")
        gram = self.a @ self.a.T
        if np.max(np.abs(gram - np.eye(self.L))) > tol:
            raise NumericError("input weights are not row-orthonormal")
        if abs(float(self.b @ self.b) - 1.0) > tol:
            raise NumericError("bias vector is not unit length")


def init_weights(D: int, L: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    if not 1 <= L <= D:
        raise ConfigError(f"need 1 <= L <= D for orthonormal input weights (L={L}, D={D})")
    rng = np.random.default_rng(seed)
    gaussian = rng.standard_normal((D, L))
    q, r = np.linalg.qr(gaussian)
    # sign fix makes the factor unique for a given draw
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    a = np.ascontiguousarray(q.T)
    b = rng.standard_normal(L)
    b = b / np.linalg.norm(b)
    return a, b


def hidden(a: np.ndarray, b: np.ndarray, X: np.ndarray, activation: str = "sigmoid") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != a.shape[1]:
        raise ShapeError(f"batch has {X.shape[1]} features, weights expect {a.shape[1]}")
    g = get_activation(activation)
    return g(X @ a.T + b)


def solve_output_weights(H: np.ndarray, X: np.ndarray, C: float) -> np.ndarray:
    """
    beta = (I/C + H^T H)^-1 H^T X via Cholesky; C = inf gives the
    generalised-inverse solution H^+ X.
    """
    if math.isinf(C):
        return np.linalg.pinv(H) @ X
    L = H.shape[1]
    system = np.eye(L) / C + H.T @ H
    rhs = H.T @ X
    try:
        factor = la.cho_factor(system, lower=False, check_finite=False)
        beta = la.cho_solve(factor, rhs, check_finite=False)
    except la.LinAlgError as exc:
        raise NumericError("ridge system is not positive definite", condition=float(np.linalg.cond(system))) from exc
    if not np.all(np.isfinite(beta)):
        raise NumericError("ridge solution is not finite", condition=float(np.linalg.cond(system)))
    return beta


def train(X: np.ndarray, L: int, C: float, seed: int, activation: str = "sigmoid") -> ElmParams:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ShapeError(f"batch must be (k, D) with k >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("batch contains non-finite values")
    if not C > 0:
        raise ConfigError(f"C must be > 0 (got {C})")
    a, b = init_weights(X.shape[1], L, seed)
    H = hidden(a, b, X, activation)
    beta = solve_output_weights(H, X, C)
    return ElmParams(a=a, b=b, beta=beta, C=float(C), activation=activation, seed=int(seed))


def reconstruct(params: ElmParams, X: np.ndarray) -> np.ndarray:
    return hidden(params.a, params.b, X, params.activation) @ params.beta
