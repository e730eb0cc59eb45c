"""Explicit one-hidden-layer representations of symmetric functions.

Sigmoid: f_A = sign(-0.5 + sum_{i in A} Delta_i) with
Delta_i(k) = s(5(k - i + 0.5)) + s(5(i + 0.5 - k)) - 1.

ReLU: with A = {i_1 < ... < i_t} and B the midpoints of consecutive
elements, the score (i_t - i_1)/2 + 0.5 + sum_A Gamma_i - sum_B Gamma_i is
exactly 0.5 on A and at most -0.5 off A, where Gamma_i(k) = -|k - i|.
The ReLU network reuses the hidden layer of ``symmetric_init`` so the same
output weights certify a margin on the initial embedding.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .network import RELU, SIGMOID, TwoLayerNetwork, symmetric_init
from .symfun import SymmetricFunction, all_inputs, weight_representatives

SIGMOID_SLOPE = 5.0

SIGMOID_POS_GAP = 0.34
SIGMOID_NEG_GAP = -0.33


def _sig(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def gamma_value(i: float, k: float) -> float:
    return -max(k - i, 0.0) - max(i - k, 0.0)


def delta_value(i: int, k: int) -> float:
    # s(a) + s(b) - 1 rewritten as s(c) - s(c - 5) with c <= 2.5 so far tails stay positive
    c = SIGMOID_SLOPE * (i + 0.5 - k) if k >= i else SIGMOID_SLOPE * (k - i + 0.5)
    return _sig(c) - _sig(c - SIGMOID_SLOPE)


@dataclass(frozen=True)
class IndicatorAtom:
    """A pair of hidden units realizing Delta_i (sigmoid) or Gamma_i (ReLU)."""

    kind: str  # "sigmoid_pair" | "relu_pair"
    center: float
    coefficient: int


def relu_atoms(f: SymmetricFunction) -> tuple[list[IndicatorAtom], float]:
    """Gamma atoms and output bias of the ReLU representation of f."""
    A = f.sorted_support
    if not A:
        return [], -0.5
    if len(A) == f.n + 1:
        return [], 0.5
    if len(A) == 1:
        return [IndicatorAtom("relu_pair", float(A[0]), 1)], 0.5
    mids = [(a + c) / 2 for a, c in zip(A, A[1:])]
    atoms = [IndicatorAtom("relu_pair", float(i), 1) for i in A]
    atoms += [IndicatorAtom("relu_pair", m, -1) for m in mids]
    return atoms, (A[-1] - A[0]) / 2 + 0.5


def relu_score_of_weight(f: SymmetricFunction, k: float) -> float:
    """Closed-form ReLU representation score at weight k (no network)."""
    atoms, bias = relu_atoms(f)
    return bias + sum(a.coefficient * gamma_value(a.center, k) for a in atoms)


def build_relu_net(f: SymmetricFunction) -> TwoLayerNetwork:
    """ReLU network on the symmetric-init hidden layer (width 4n+2) representing f."""
    net = symmetric_init(f.n)
    atoms, bias = relu_atoms(f)
    M = np.zeros(net.hidden_width)
    for a in atoms:
        j = int(round(2 * a.center))
        # Gamma_c = -ReLU(k - c) - ReLU(c - k): units 2j and 2j+1 (0-based)
        M[2 * j] -= a.coefficient
        M[2 * j + 1] -= a.coefficient
    net.M = M
    net.b = bias
    return net


def build_sigmoid_net(f: SymmetricFunction) -> TwoLayerNetwork:
    """Sigmoid network of width 2n+2; units for weights outside A get zero output weight."""
    n = f.n
    if n < 1:
        raise ValueError("n must be >= 1")
    centers = np.arange(n + 1, dtype=np.float64)
    W = np.empty((2 * (n + 1), n))
    B = np.empty(2 * (n + 1))
    # unit 2i: s(5(|x| - i + 0.5)); unit 2i+1: s(5(i + 0.5 - |x|))
    W[0::2] = SIGMOID_SLOPE
    W[1::2] = -SIGMOID_SLOPE
    B[0::2] = SIGMOID_SLOPE * (0.5 - centers)
    B[1::2] = SIGMOID_SLOPE * (centers + 0.5)
    M = np.zeros(2 * (n + 1))
    for i in f.support:
        M[2 * i] = M[2 * i + 1] = 1.0
    return TwoLayerNetwork(W, B, M, -0.5 - len(f.support), SIGMOID)


# -- verification oracle ----------------------------------------------------

@dataclass
class CheckReport:
    """Per-weight scores of a network against a symmetric target."""

    weights: list[int]
    scores: list[float]
    expected: list[int]
    exact: bool
    exhaustive: bool = False
    exhaustive_failures: int = 0
    failures: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.exhaustive_failures == 0

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["weight", "score", "expected", "pass"])
            for k, s, e in zip(self.weights, self.scores, self.expected):
                ok = (1 if s > 0 else -1) == e
                w.writerow([k, repr(float(s)), "+1" if e > 0 else "-1", "true" if ok else "false"])


_INT_LIMIT = 2**20


def _half_integral(a) -> bool:
    a2 = 2 * np.asarray(a, dtype=np.float64)
    return bool(np.all(a2 == np.rint(a2)) and np.all(np.abs(a2) < _INT_LIMIT))


def _int_path_safe(net: TwoLayerNetwork, X: np.ndarray) -> bool:
    if not np.all((X == 0) | (X == 1)):
        return False
    if not all(_half_integral(p) for p in (net.W, net.B, net.M, net.b)):
        return False
    # |score * 4| <= width * 2^20 * (n + 1) * 2^20 must fit in int64
    return net.hidden_width * (net.n + 1) < 2**22


def exact_relu_scores(net: TwoLayerNetwork, X: np.ndarray) -> list[Fraction]:
    """Exact scores of a ReLU network.

    Half-integral parameters on bit inputs use int64 arithmetic scaled by 4;
    anything else falls back to exact Fractions of the stored doubles.
    """
    X = np.asarray(X, dtype=np.float64)
    if _int_path_safe(net, X):
        W2 = np.rint(2 * net.W).astype(np.int64)
        B2 = np.rint(2 * net.B).astype(np.int64)
        M2 = np.rint(2 * net.M).astype(np.int64)
        b4 = int(np.rint(4 * net.b))
        pre2 = X.astype(np.int64) @ W2.T + B2  # 2 * (W x + B)
        v2 = np.maximum(pre2, 0)
        return [Fraction(int(s) + b4, 4) for s in v2 @ M2]
    W = [[Fraction(w) for w in row] for row in net.W]
    B = [Fraction(v) for v in net.B]
    M = [Fraction(v) for v in net.M]
    b = Fraction(net.b)
    out = []
    for x in X:
        xf = [Fraction(v) for v in x]
        s = b
        for wi, bi, mi in zip(W, B, M):
            pre = sum((w * xj for w, xj in zip(wi, xf)), bi)
            if pre > 0:
                s += mi * pre
        out.append(s)
    return out


def verify_repr(net: TwoLayerNetwork, f: SymmetricFunction, exhaustive_limit: int = 12) -> CheckReport:
    """Check sign(score) == f on one input per weight, and on all of {0,1}^n when n is small."""
    if net.n != f.n:
        raise ValueError(f"network has n={net.n}, target has n={f.n}")
    reps = weight_representatives(f.n)
    expected = [f.label_of_weight(k) for k in range(f.n + 1)]
    exact = net.activation == RELU
    if exact:
        fracs = exact_relu_scores(net, reps)
        scores = [float(s) for s in fracs]
        signs = [1 if s > 0 else -1 for s in fracs]
    else:
        scores = [float(s) for s in net.scores(reps)]
        signs = [1 if s > 0 else -1 for s in scores]
    failures = [k for k in range(f.n + 1) if signs[k] != expected[k]]
    report = CheckReport(list(range(f.n + 1)), scores, expected, exact, failures=failures)
    if f.n <= exhaustive_limit:
        X = all_inputs(f.n)
        if exact:
            got = np.array([1 if s > 0 else -1 for s in exact_relu_scores(net, X)])
        else:
            got = net.predict_many(X)
        report.exhaustive = True
        report.exhaustive_failures = int(np.sum(got != f.labels(X)))
    return report


def sigmoid_gaps_ok(net: TwoLayerNetwork, f: SymmetricFunction) -> bool:
    """Scores exceed 0.34 on A and stay below -0.33 off A."""
    s = net.scores(weight_representatives(f.n))
    lab = f.weight_labels()
    return bool(np.all(s[lab > 0] > SIGMOID_POS_GAP) and np.all(s[lab < 0] < SIGMOID_NEG_GAP))
