"""Independent reference computations used by the tests.

Nothing here calls into the code path it checks: margins come from direction
search and pairwise candidate enumeration, representation scores from the
closed-form Gamma sums in exact rationals, SGD steps from a scalar loop.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def max_margin_grid(points: np.ndarray, labels: np.ndarray, directions: int = 100_000) -> float:
    """Best margin of a unit vector through the origin in 2-D, by direction search."""
    theta = np.linspace(0.0, 2 * np.pi, directions, endpoint=False)
    U = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    margins = (labels[None, :] * (U @ points.T)).min(axis=1)
    return float(margins.max())


def max_margin_exact_2d(points: np.ndarray, labels: np.ndarray) -> float:
    """Exact 2-D maximum margin: the optimum is attained at a direction of a single
    y_i p_i or at a direction equalizing two constraints."""
    Z = labels[:, None] * points
    cands = [z / np.linalg.norm(z) for z in Z if np.linalg.norm(z) > 0]
    for a, b in itertools.combinations(Z, 2):
        d = a - b
        if np.linalg.norm(d) == 0:
            continue
        perp = np.array([-d[1], d[0]]) / np.linalg.norm(d)
        cands += [perp, -perp]
    return max(float((Z @ u).min()) for u in cands)


def max_margin_2d(points, labels) -> float:
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    return max(max_margin_grid(points, labels), max_margin_exact_2d(points, labels))


def relu_rep_score_exact(support: set[int], k: int) -> Fraction:
    """Closed-form ReLU representation score at weight k, as a Fraction."""
    A = sorted(support)
    if not A:
        return Fraction(-1, 2)
    t = len(A)
    mids = [Fraction(a + b, 2) for a, b in zip(A, A[1:])]
    bias = Fraction(A[-1] - A[0], 2) + Fraction(1, 2)
    score = bias - sum(abs(Fraction(k) - i) for i in A) + sum(abs(Fraction(k) - c) for c in mids)
    return score if t > 0 else Fraction(-1, 2)


def sigmoid_rep_score(support: set[int], k: int) -> float:
    """-0.5 + sum of Delta_i at weight k, straight from the formula."""
    s = lambda z: 1.0 / (1.0 + math.exp(-z)) if z > -700 else 0.0  # noqa: E731
    return -0.5 + sum(s(5 * (k - i + 0.5)) + s(5 * (i + 0.5 - k)) - 1 for i in support)


def sgd_step_scalar(W, B, M, b, x, y, h, beta):
    """Hand loop of the four-part update; returns new (W, B, M, b) or None if skipped."""
    width, n = len(W), len(x)
    pre = [sum(W[i][j] * x[j] for j in range(n)) + B[i] for i in range(width)]
    v = [p if p > 0 else 0.0 for p in pre]
    score = sum(M[i] * v[i] for i in range(width)) + b
    if y * score > beta:
        return None
    W2 = [[W[i][j] + (y * M[i] * h * x[j] if pre[i] > 0 else 0.0) for j in range(n)] for i in range(width)]
    B2 = [B[i] + (y * M[i] * h if pre[i] > 0 else 0.0) for i in range(width)]
    M2 = [M[i] + y * v[i] * h for i in range(width)]
    return W2, B2, M2, b + y * h


def random_separable_2d(rng: np.random.Generator, k: int, min_margin: float = 0.05):
    """k points in [-1,1]^2 labeled by a random direction, with margin >= min_margin."""
    while True:
        u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        P = rng.uniform(-1, 1, size=(k, 2))
        s = P @ u
        if np.all(np.abs(s) >= min_margin):
            return P, np.where(s > 0, 1.0, -1.0)
