"""Symmetric Boolean functions on {0,1}^n and labeled samples drawn from them."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class SymmetricFunction:
    """f_A(x) = +1 if the Hamming weight of x lies in ``support``, else -1."""

    n: int
    support: frozenset[int]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be nonnegative, got {self.n}")
        support = frozenset(int(k) for k in self.support)
        bad = [k for k in support if not 0 <= k <= self.n]
        if bad:
            raise ValueError(f"support elements {sorted(bad)} outside [0, {self.n}]")
        object.__setattr__(self, "support", support)

    @property
    def sorted_support(self) -> list[int]:
        return sorted(self.support)

    def label_of_weight(self, k: int) -> int:
        return 1 if k in self.support else -1

    def weight_labels(self) -> np.ndarray:
        """Labels of weights 0..n as an int array of length n+1."""
        return np.array([self.label_of_weight(k) for k in range(self.n + 1)], dtype=np.int64)

    def __call__(self, x) -> int:
        return evaluate(self, x)

    def labels(self, X: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over the rows of a bit matrix."""
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected an (m, {self.n}) array, got shape {X.shape}")
        weights = np.rint(X.sum(axis=1)).astype(np.int64)
        return self.weight_labels()[weights]


def hamming_weight(x) -> int:
    return int(np.sum(np.asarray(x, dtype=np.int64)))


def evaluate(f: SymmetricFunction, x) -> int:
    x = np.asarray(x)
    if x.shape != (f.n,):
        raise ValueError(f"input has shape {x.shape}, function expects ({f.n},)")
    return f.label_of_weight(hamming_weight(x))


def parity_support(n: int) -> SymmetricFunction:
    """Parity (-1)^|x|: +1 exactly on the even weights."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return SymmetricFunction(n, frozenset(range(0, n + 1, 2)))


def majority_support(n: int) -> SymmetricFunction:
    """Strict majority; at even n the tie |x| = n/2 is labeled -1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return SymmetricFunction(n, frozenset(k for k in range(n + 1) if 2 * k > n))


def random_symfun(n: int, rng: np.random.Generator) -> SymmetricFunction:
    """Include each weight 0..n in the support independently with probability 1/2."""
    keep = rng.random(n + 1) < 0.5
    return SymmetricFunction(n, frozenset(int(k) for k in np.flatnonzero(keep)))


CLEAN = "clean"
LABEL_FLIPPED = "label_flipped"
INPUT_PERTURBED = "input_perturbed"


@dataclass(frozen=True)
class Dataset:
    """Labeled samples; ``X`` is (m, n) float64 and ``y`` is (m,) float64 of +-1.

    ``provenance`` is one of ``clean``, ``label_flipped`` or ``input_perturbed``;
    ``level`` carries the flip probability or shift radius.
    """

    n: int
    X: np.ndarray
    y: np.ndarray
    provenance: str = CLEAN
    level: float = 0.0
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64).reshape(-1, self.n)
        y = np.array(self.y, dtype=np.float64).reshape(-1)
        if len(X) != len(y):
            raise ValueError(f"{len(X)} inputs but {len(y)} labels")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be +1 or -1")
        # weights of the underlying bit vectors; kept through corruption
        w = self.weights
        w = np.rint(X.sum(axis=1)).astype(np.int64) if w is None else np.array(w, dtype=np.int64)
        for arr in (X, y, w):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.y)

    def __iter__(self):
        return zip(self.X, self.y)


def sample_inputs(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """m i.i.d. uniform points of {0,1}^n as float64 rows."""
    return rng.integers(0, 2, size=(m, n)).astype(np.float64)


def sample_dataset(f: SymmetricFunction, m: int, rng: np.random.Generator) -> Dataset:
    if m < 1:
        raise ValueError("m must be >= 1")
    X = sample_inputs(f.n, m, rng)
    return Dataset(f.n, X, f.labels(X).astype(np.float64))


def flip_labels(ds: Dataset, p: float, rng: np.random.Generator) -> Dataset:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"flip probability must lie in [0, 1], got {p}")
    flips = rng.random(len(ds)) < p
    y = np.where(flips, -ds.y, ds.y)
    return Dataset(ds.n, ds.X, y, LABEL_FLIPPED, float(p), ds.weights)


def perturb_inputs(ds: Dataset, eps: float, rng: np.random.Generator) -> Dataset:
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    shift = rng.uniform(-eps, eps, size=ds.X.shape)
    return Dataset(ds.n, ds.X + shift, ds.y, INPUT_PERTURBED, float(eps), ds.weights)


def write_dataset_csv(ds: Dataset, path) -> None:
    """Header ``x_0,...,x_{n-1},label``; bits print as 0/1, labels as +1/-1."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x_{j}" for j in range(ds.n)] + ["label"])
        for x, y in ds:
            w.writerow([_fmt_input(v) for v in x] + ["+1" if y > 0 else "-1"])


def _fmt_input(v: float) -> str:
    if v == 0.0 or v == 1.0:
        return str(int(v))
    return repr(float(v))


def read_dataset_csv(path) -> Dataset:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[-1] != "label":
        raise ValueError(f"{path}: last column must be 'label', got {header[-1]!r}")
    n = len(header) - 1
    X = np.array([[float(v) for v in r[:-1]] for r in body], dtype=np.float64).reshape(-1, n)
    y = np.array([float(r[-1]) for r in body], dtype=np.float64)
    return Dataset(n, X, y)


def all_inputs(n: int) -> np.ndarray:
    """Every point of {0,1}^n, one per row (2^n rows)."""
    idx = np.arange(2**n, dtype=np.int64)[:, None]
    return ((idx >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)


def weight_representatives(n: int, weights: Iterable[int] | None = None) -> np.ndarray:
    """One bit vector per Hamming weight: the first k coordinates set."""
    ks = range(n + 1) if weights is None else list(weights)
    return np.array([[1.0 if j < k else 0.0 for j in range(n)] for k in ks], dtype=np.float64).reshape(-1, n)
