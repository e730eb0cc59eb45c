"""Modified perceptron, its convergence/margin guarantees, and margin certificates
for the symmetric-init embedding.

The modified perceptron starts at w = 0 and, while some point has
y (w . v) <= beta, adds y v h.  For a point set of radius R and margin gamma it
stops within (2 beta h + (R h)^2) / (gamma h)^2 updates with margin at least
gamma beta h / (2 beta h + (R h)^2).
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .network import initial_embedding_classes
from .reprbuild import build_relu_net, exact_relu_scores
from .symfun import SymmetricFunction, weight_representatives


RECORD_CAP = 2**24


class PerceptronDidNotConverge(RuntimeError):
    """The update budget ran out: the data is not separable or gamma was overestimated."""


class AlignmentError(AssertionError):
    """A certificate separator failed on the embedding it was built for."""


@dataclass(frozen=True)
class LabeledPointSet:
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        P = np.array(self.points, dtype=np.float64, ndmin=2)
        y = np.array(self.labels, dtype=np.float64).reshape(-1)
        if len(P) != len(y):
            raise ValueError(f"{len(P)} points but {len(y)} labels")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "labels", y)

    @property
    def R(self) -> float:
        return float(np.linalg.norm(self.points, axis=1).max())

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def margin_of(w, ps: LabeledPointSet) -> float:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (ps.dim,):
        raise ValueError(f"w has shape {w.shape}, points have dimension {ps.dim}")
    norm = np.linalg.norm(w)
    if norm == 0:
        raise ValueError("margin of the zero vector is undefined")
    return float(np.min(ps.labels * (ps.points @ w)) / norm)


def theorem2_bounds(gamma: float, R: float, h: float, beta: float) -> tuple[float, float]:
    """(update bound, margin lower bound) for the modified perceptron."""
    if not (gamma > 0 and R > 0 and h > 0 and beta >= 0):
        raise ValueError("need gamma > 0, R > 0, h > 0, beta >= 0")
    top = 2 * beta * h + (R * h) ** 2
    return top / (gamma * h) ** 2, gamma * beta * h / top


@dataclass
class PerceptronResult:
    w: np.ndarray
    updates: int
    achieved_margin: float
    bound_updates: float
    bound_margin: float
    wall_time_ms: float = 0.0
    update_indices: np.ndarray | None = None

    def summary(self) -> dict:
        return {
            "updates": self.updates,
            "achieved_margin": self.achieved_margin,
            "bound_updates": self.bound_updates,
            "bound_margin": self.bound_margin,
            "wall_time_ms": self.wall_time_ms,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=1) + "\n")


def run_modified_perceptron(
    ps: LabeledPointSet,
    h: float,
    beta: float,
    max_updates: int | None = None,
    gamma: float | None = None,
    record: bool = False,
) -> PerceptronResult:
    """Run the modified perceptron with a cyclic scan starting at point 0.

    ``gamma`` (a lower bound on the margin of ``ps``) fills in the bound fields
    and sets the default budget to 10x the update bound.  ``record`` keeps the
    index of the point used by each of the first ``RECORD_CAP`` updates.
    """
    if not h > 0 or beta < 0:
        raise ValueError("need h > 0 and beta >= 0")
    if gamma is not None:
        bound_updates, bound_margin = theorem2_bounds(gamma, ps.R, h, beta)
    else:
        bound_updates = bound_margin = math.nan
    if max_updates is None:
        if gamma is None:
            raise ValueError("give max_updates or a margin lower bound gamma")
        max_updates = int(min(10 * math.ceil(bound_updates), 2**62))
    w = np.zeros(ps.dim)
    rec = np.empty(min(max_updates, RECORD_CAP) if record else 0, dtype=np.int64)
    t0 = time.perf_counter()
    updates, converged = _kernels.perceptron_scan(
        ps.points, ps.labels, float(h), float(beta), w, 0, int(max_updates), rec
    )
    elapsed = (time.perf_counter() - t0) * 1e3
    if not converged:
        raise PerceptronDidNotConverge(
            f"no convergence within {max_updates} updates (bound {bound_updates:.4g})"
        )
    achieved = margin_of(w, ps) if np.any(w) else math.nan
    return PerceptronResult(
        w, int(updates), achieved, bound_updates, bound_margin, elapsed,
        rec[: min(updates, len(rec))].copy() if record else None,
    )


@dataclass
class SeparatorCertificate:
    """(M*, b*) packed as one vector acting on embedded points (trailing 1)."""

    separator: np.ndarray
    margin_lb: float
    norm: float
    min_gap: float
    R: float

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("separator")
        return d


def lemma3_certificate(n: int, f: SymmetricFunction) -> SeparatorCertificate:
    """Margin certificate for f on the symmetric-init embedding.

    The ReLU representation shares the hidden layer of ``symmetric_init``;
    its output weights separate all n+1 weight classes with gap >= 0.5,
    checked exactly, so the margin is at least 0.5 / ||(M*, b*)||.
    """
    if f.n != n:
        raise ValueError(f"target has n={f.n}, expected {n}")
    net = build_relu_net(f)
    exact = exact_relu_scores(net, weight_representatives(n))
    labels = f.weight_labels()
    gaps = [lab * s for lab, s in zip(labels, exact)]
    if min(gaps) < 0.5:
        bad = [k for k, g in enumerate(gaps) if g < 0.5]
        raise AlignmentError(f"separator gap below 0.5 at weights {bad}")
    sep = np.append(net.M, net.b)
    emb = initial_embedding_classes(n)
    # float cross-check on the packed form
    if np.any(labels * (emb.points @ sep) < 0.5 - 1e-9):
        raise AlignmentError("packed separator disagrees with the exact network scores")
    norm = float(np.linalg.norm(sep))
    return SeparatorCertificate(sep, 0.5 / norm, norm, float(min(gaps)), emb.max_norm)


def embedding_point_set(n: int, f: SymmetricFunction) -> LabeledPointSet:
    """The n+1 initial embedding classes labeled by f."""
    emb = initial_embedding_classes(n)
    return LabeledPointSet(emb.points, f.weight_labels().astype(np.float64))
