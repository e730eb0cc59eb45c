"""One-hidden-layer networks: forward pass, symmetric and random initialization.

Hidden rows are indexed from 1 in the initialization formulas.  Unit pair
(2j+1, 2j+2) watches the threshold c_j = j/2 for j = 0..2n: the odd unit
computes ReLU(|x| - c_j), the even unit ReLU(c_j - |x|).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .symfun import weight_representatives

RELU = "relu"
SIGMOID = "sigmoid"


def relu(z):
    return np.maximum(z, 0.0)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


_ACTIVATIONS = {RELU: relu, SIGMOID: sigmoid}


@dataclass
class TwoLayerNetwork:
    """score(x) = M . act(W x + B) + b."""

    W: np.ndarray
    B: np.ndarray
    M: np.ndarray
    b: float
    activation: str = RELU

    def __post_init__(self):
        self.W = np.array(self.W, dtype=np.float64, ndmin=2)
        self.B = np.array(self.B, dtype=np.float64).reshape(-1)
        self.M = np.array(self.M, dtype=np.float64).reshape(-1)
        self.b = float(self.b)
        width = self.W.shape[0]
        if width < 1 or self.W.shape[1] < 1:
            raise ValueError(f"W must be nonempty, got shape {self.W.shape}")
        if self.B.shape != (width,) or self.M.shape != (width,):
            raise ValueError(f"B and M must have length {width}")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def n(self) -> int:
        return self.W.shape[1]

    @property
    def hidden_width(self) -> int:
        return self.W.shape[0]

    def copy(self) -> "TwoLayerNetwork":
        return TwoLayerNetwork(self.W.copy(), self.B.copy(), self.M.copy(), self.b, self.activation)

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.W).all() and np.isfinite(self.B).all()
            and np.isfinite(self.M).all() and np.isfinite(self.b)
        )

    def hidden(self, X: np.ndarray) -> np.ndarray:
        """Hidden outputs for a batch of inputs (rows)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected inputs of shape (m, {self.n}), got {X.shape}")
        return _ACTIVATIONS[self.activation](X @ self.W.T + self.B)

    def scores(self, X: np.ndarray) -> np.ndarray:
        return self.hidden(X) @ self.M + self.b

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.scores(X) > 0, 1, -1)


def forward(net: TwoLayerNetwork, x) -> tuple[np.ndarray, float]:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.n,):
        raise ValueError(f"input has shape {x.shape}, network expects ({net.n},)")
    with np.errstate(over="ignore", invalid="ignore"):
        v = net.hidden(x[None, :])[0]
        score = float(v @ net.M + net.b)
    if not np.isfinite(score):
        raise FloatingPointError("non-finite score (overflow in forward pass)")
    return v, score


def predict(net: TwoLayerNetwork, x) -> int:
    # score exactly 0 predicts -1
    return 1 if forward(net, x)[1] > 0 else -1


def threshold_grid(n: int) -> np.ndarray:
    """Centers c_j = j/2, j = 0..2n, one per hidden unit pair."""
    return np.arange(2 * n + 1, dtype=np.float64) / 2.0


def symmetric_init(n: int) -> TwoLayerNetwork:
    """w_ij = (-1)^(i+1), b_i = 0.5 (-1)^i floor((i-1)/2) for i = 1..4n+2; M = 0, b = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(1, 4 * n + 3)
    sign = np.where(i % 2 == 1, 1.0, -1.0)  # (-1)^(i+1)
    W = np.repeat(sign[:, None], n, axis=1)
    B = 0.5 * (-sign) * ((i - 1) // 2) + 0.0  # normalizes -0.0
    return TwoLayerNetwork(W, B, np.zeros(len(i)), 0.0, RELU)


def random_init(n: int, hidden_width: int, scale: float, rng: np.random.Generator) -> TwoLayerNetwork:
    """Every parameter i.i.d. N(0, (scale / sqrt(n))^2)."""
    if hidden_width < 1:
        raise ValueError("hidden_width must be >= 1")
    if not scale > 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    sd = scale / np.sqrt(n)
    W = rng.normal(0.0, sd, size=(hidden_width, n))
    B = rng.normal(0.0, sd, size=hidden_width)
    M = rng.normal(0.0, sd, size=hidden_width)
    b = rng.normal(0.0, sd)
    return TwoLayerNetwork(W, B, M, b, RELU)


@dataclass(frozen=True)
class Embedding:
    """Hidden outputs with a trailing constant-1 coordinate, one row per input.

    ``weights`` holds the Hamming weight tag of each row when known.
    """

    points: np.ndarray
    source: str
    weights: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def max_norm(self) -> float:
        if len(self.points) == 0:
            return 0.0
        return float(np.linalg.norm(self.points, axis=1).max())


def embed(net: TwoLayerNetwork, inputs, source: str = "inputs") -> Embedding:
    X = np.asarray(inputs, dtype=np.float64).reshape(-1, net.n)
    V = net.hidden(X)
    points = np.hstack([V, np.ones((len(V), 1))])
    return Embedding(points, source)


def initial_embedding_classes(n: int) -> Embedding:
    """The n+1 distinct embedded points of ``symmetric_init(n)``, tagged by weight."""
    emb = embed(symmetric_init(n), weight_representatives(n), source=f"symmetric_init({n}) weight classes")
    return Embedding(emb.points, emb.source, np.arange(n + 1))


# -- serialization ---------------------------------------------------------

def _hex(a) -> list:
    return [float(v).hex() for v in np.asarray(a, dtype=np.float64).reshape(-1)]


def network_to_dict(net: TwoLayerNetwork) -> dict:
    return {
        "n": net.n,
        "hidden_width": net.hidden_width,
        "activation": net.activation,
        "W": _hex(net.W),
        "B": _hex(net.B),
        "M": _hex(net.M),
        "b": float(net.b).hex(),
    }


def network_from_dict(d: dict) -> TwoLayerNetwork:
    n, width = int(d["n"]), int(d["hidden_width"])

    def arr(key):
        return np.array([float.fromhex(s) for s in d[key]], dtype=np.float64)

    W = arr("W").reshape(width, n)
    return TwoLayerNetwork(W, arr("B"), arr("M"), float.fromhex(d["b"]), d["activation"])


def save_network(net: TwoLayerNetwork, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1) + "\n")


def load_network(path) -> TwoLayerNetwork:
    return network_from_dict(json.loads(Path(path).read_text()))
