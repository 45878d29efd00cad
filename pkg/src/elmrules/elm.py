"""Extreme learning machine: random hidden layer + minimal-norm output weights."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ElmError(ValueError):
    pass


class DimensionMismatch(ElmError):
    pass


class NonFiniteInput(ElmError):
    pass


def _sigmoid(z):
    # split by sign so large |z| never overflows exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


ACTIVATIONS = {"sigmoid": _sigmoid, "tanh": np.tanh}


@dataclass(frozen=True, eq=False)
class ElmModel:
    W: np.ndarray  # L x n hidden input weights
    d: np.ndarray  # L hidden thresholds
    beta: np.ndarray  # L x m output weights
    activation: str = "sigmoid"
    seed: int = 0
    preprocessing: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        d = np.asarray(self.d, dtype=float).reshape(-1)
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim == 1:
            beta = beta[:, None]
        if self.activation not in ACTIVATIONS:
            raise ElmError(f"unknown activation {self.activation!r}")
        if d.shape[0] != W.shape[0] or beta.shape[0] != W.shape[0]:
            raise DimensionMismatch(f"inconsistent shapes W{W.shape} d{d.shape} beta{beta.shape}")
        if not np.isfinite(beta).all():
            raise NonFiniteInput("output weights contain NaN/Inf")
        for name, a in (("W", W), ("d", d), ("beta", beta)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ElmModel):
            return NotImplemented
        return (self.activation == other.activation and self.seed == other.seed
                and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("W", "d", "beta")))

    __hash__ = None

    @property
    def L(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        return self.W.shape[1]

    @property
    def m(self) -> int:
        return self.beta.shape[1]

    def to_dict(self) -> dict:
        return {
            "W": self.W.tolist(),
            "d": self.d.tolist(),
            "beta": self.beta.tolist(),
            "activation": self.activation,
            "L": self.L,
            "seed": self.seed,
            "preprocessing": self.preprocessing,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ElmModel":
        model = cls(
            np.asarray(payload["W"], float),
            np.asarray(payload["d"], float),
            np.asarray(payload["beta"], float),
            activation=payload.get("activation", "sigmoid"),
            seed=int(payload.get("seed", 0)),
            preprocessing=payload.get("preprocessing"),
        )
        if "L" in payload and int(payload["L"]) != model.L:
            raise DimensionMismatch(f"L={payload['L']} disagrees with W rows {model.L}")
        return model

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ElmModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def hidden_matrix(model: ElmModel, X) -> np.ndarray:
    """H[j, i] = G(w_i . x_j + d_i)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n:
        raise DimensionMismatch(f"model expects {model.n} features, got {X.shape[1]}")
    return ACTIVATIONS[model.activation](X @ model.W.T + model.d)


def min_norm_lstsq(H, Y, rank_tol: float = 1e-10) -> np.ndarray:
    """Minimal-norm least-squares solution ``pinv(H) @ Y`` through an SVD.

    Singular values below ``rank_tol * s_max`` are treated as exact zeros.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    Y = np.asarray(Y, dtype=float)
    squeeze = Y.ndim == 1
    if squeeze:
        Y = Y[:, None]
    if H.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"H has {H.shape[0]} rows, Y has {Y.shape[0]}")
    if not (np.isfinite(H).all() and np.isfinite(Y).all()):
        raise NonFiniteInput("H and Y must be finite")
    U, s, Vt = np.linalg.svd(H, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        beta = np.zeros((H.shape[1], Y.shape[1]))
    else:
        keep = s > rank_tol * s[0]
        inv_s = np.zeros_like(s)
        inv_s[keep] = 1.0 / s[keep]
        beta = Vt.T @ (inv_s[:, None] * (U.T @ Y))
    return beta[:, 0] if squeeze else beta


def train(
    X,
    labels,
    L: int = 50,
    activation: str = "sigmoid",
    seed: int = 0,
    rank_tol: float = 1e-10,
    preprocessing: dict | None = None,
) -> ElmModel:
    """Fit an ELM to +/-1 targets on already-standardized inputs ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if L < 1:
        raise ElmError("L must be >= 1")
    if X.shape[0] < 1:
        raise ElmError("training set is empty")
    rng = np.random.default_rng(seed)
    W = rng.uniform(-1.0, 1.0, size=(L, X.shape[1]))
    d = rng.uniform(-1.0, 1.0, size=L)
    Y = np.asarray(labels, dtype=float).reshape(-1, 1)
    H = ACTIVATIONS[activation](X @ W.T + d)
    beta = min_norm_lstsq(H, Y, rank_tol)
    return ElmModel(W, d, beta, activation=activation, seed=seed, preprocessing=preprocessing)


def train_dataset(ds, L: int = 50, activation: str = "sigmoid", seed: int = 0, rank_tol: float = 1e-10) -> ElmModel:
    return train(ds.rows, ds.labels, L=L, activation=activation, seed=seed, rank_tol=rank_tol)


def decision(model: ElmModel, X) -> np.ndarray:
    """Real-valued output score(s); one row gives a scalar."""
    X = np.asarray(X, dtype=float)
    scores = (hidden_matrix(model, X) @ model.beta)[:, 0]
    return float(scores[0]) if X.ndim == 1 else scores


def predict(model: ElmModel, X):
    """+1 when the score is strictly positive, otherwise -1 (ties go unstable)."""
    s = decision(model, X)
    if np.isscalar(s):
        return 1 if s > 0 else -1
    return np.where(s > 0, 1, -1)
