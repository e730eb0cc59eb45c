"""Hinge-loss SGD (batch size one) on the whole two-layer ReLU network.

On a sample (x, y) with y (M . v_x + b) <= beta, all four parameter groups move
at once, each computed from the pre-update values:

    W_i += y m_i x h   and   B_i += y m_i h   for every unit i that fired,
    M   += y v_x h,          b   += y h.

The output layer therefore follows the modified perceptron on the moving
embedding.  Runtime monitors track ||M||, how far embedded probe inputs drift
from their time-0 position, and (optionally) enforce the worst-case bounds

    drift <= 2 sqrt(6) R_X^2 h^2 R t^(3/2),    ||M|| <= 2 sqrt(3) R h sqrt(t).
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import _kernels
from .network import RELU, TwoLayerNetwork
from .perceptron import RECORD_CAP
from .symfun import Dataset, sample_inputs

log = logging.getLogger(__name__)

ZERO_LOSS_EPOCH = "zero_loss_epoch"
MAX_UPDATES = "max_updates"
MAX_EPOCHS = "max_epochs"

APPLIED = "applied"
SKIPPED = "skipped"


class TrainingDiverged(FloatingPointError):
    """Weights or scores became non-finite."""


class BoundViolation(AssertionError):
    """A monitored worst-case bound was exceeded during training."""


@dataclass(frozen=True)
class TrainConfig:
    h: float
    beta: float
    max_updates: int | None = None
    max_epochs: int = 1000
    shuffle_each_epoch: bool = True
    monitor_probe_size: int = 0
    frozen_hidden: bool = False
    stop_at_zero_loss: bool = True
    log_every: int | None = None
    # R and R_X for the drift / ||M|| bounds; bounds are skipped when R is None
    bound_R: float | None = None
    bound_RX: float | None = None
    enforce_bounds: bool = False
    # keep the sample index of each applied update (first RECORD_CAP of them)
    record_updates: bool = False

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"h must be > 0, got {self.h}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.monitor_probe_size < 0:
            raise ValueError("monitor_probe_size must be >= 0")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")

    @property
    def log_cadence(self) -> int:
        if self.log_every is not None:
            return max(1, int(self.log_every))
        if self.max_updates is None:
            return 1000
        return max(1, math.ceil(self.max_updates / 1000))

    def drift_bound(self, t: int) -> float:
        if self.bound_R is None or self.bound_RX is None:
            return math.nan
        return 2 * math.sqrt(6) * self.bound_RX**2 * self.h**2 * self.bound_R * t**1.5

    def M_bound(self, t: int) -> float:
        if self.bound_R is None:
            return math.nan
        return 2 * math.sqrt(3) * self.bound_R * self.h * math.sqrt(t)


@dataclass
class EpochRecord:
    epoch: int
    updates: int
    train_error: float
    true_error: float = math.nan
    M_norm: float = math.nan
    max_drift: float = math.nan
    drift_bound: float = math.nan


@dataclass
class MonitorRecord:
    t: int
    M_norm: float
    max_drift: float
    R_t: float
    drift_bound: float
    M_bound: float


@dataclass
class TrainTrace:
    epochs: list[EpochRecord] = field(default_factory=list)
    monitors: list[MonitorRecord] = field(default_factory=list)
    status: str = MAX_EPOCHS
    updates: int = 0
    update_indices: np.ndarray | None = None

    @property
    def final_train_error(self) -> float:
        return self.epochs[-1].train_error if self.epochs else math.nan

    @property
    def final_true_error(self) -> float:
        for rec in reversed(self.epochs):
            if not math.isnan(rec.true_error):
                return rec.true_error
        return math.nan

    def to_csv(self, path) -> None:
        write_trace_csv(self, path)


TRACE_HEADER = ["epoch", "updates", "train_error", "true_error", "M_norm", "max_drift", "drift_bound"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def write_trace_csv(trace: TrainTrace, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in trace.epochs:
            w.writerow([_fmt(getattr(r, k)) for k in TRACE_HEADER])


def hinge_loss(score: float, y: float, beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return max(0.0, -y * score + beta)


def sgd_update(net: TwoLayerNetwork, x, y: float, h: float, beta: float, frozen_hidden: bool = False) -> str:
    """One SGD step on (x, y); mutates ``net`` and returns ``applied`` or ``skipped``.

    Plain-numpy reference for the compiled training loop.
    """
    if net.activation != RELU:
        raise ValueError("SGD dynamics are defined for ReLU networks only")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.n,):
        raise ValueError(f"input has shape {x.shape}, network expects ({net.n},)")
    pre = net.W @ x + net.B
    v = np.maximum(pre, 0.0)
    score = float(v @ net.M + net.b)
    if not np.isfinite(score):
        raise TrainingDiverged("non-finite score")
    if y * score > beta:
        return SKIPPED
    coef = y * h
    if not frozen_hidden:
        g = np.where(pre > 0, coef * net.M, 0.0)
        net.W += np.outer(g, x)
        net.B += g
    net.M += coef * v
    net.b += coef
    if not net.is_finite():
        raise TrainingDiverged("non-finite weights after update")
    return APPLIED


def drift(net_now: TwoLayerNetwork, cached_hidden_at_0: np.ndarray, probe_inputs: np.ndarray) -> float:
    """Largest Euclidean move of a probe's hidden output since time 0."""
    if len(probe_inputs) == 0:
        return 0.0
    diff = net_now.hidden(probe_inputs) - cached_hidden_at_0
    return float(np.sqrt((diff * diff).sum(axis=1)).max())


def train_error(net: TwoLayerNetwork, ds: Dataset) -> float:
    if len(ds) == 0:
        return 0.0
    return float(np.mean(net.predict_many(ds.X) != ds.y))


def train(
    net: TwoLayerNetwork,
    ds: Dataset,
    cfg: TrainConfig,
    rng: np.random.Generator,
    true_error_fn: Callable[[TwoLayerNetwork], float] | None = None,
    eval_epoch: Callable[[int], bool] | None = None,
) -> tuple[TwoLayerNetwork, TrainTrace]:
    """Train a copy of ``net`` on ``ds``; the input network is left untouched.

    Epochs visit every sample once (in a fresh random order when
    ``shuffle_each_epoch``).  Training stops after an epoch with no applied
    update (when ``stop_at_zero_loss``), at ``max_updates`` or at ``max_epochs``.
    ``true_error_fn`` is called at the end of epochs selected by ``eval_epoch``
    (default: every epoch) and always after the last one.
    """
    if net.activation != RELU:
        raise ValueError("SGD dynamics are defined for ReLU networks only")
    if ds.n != net.n:
        raise ValueError(f"dataset has n={ds.n}, network has n={net.n}")
    net = net.copy()
    trace = TrainTrace()
    if cfg.max_epochs == 0 or len(ds) == 0:
        trace.status = MAX_EPOCHS
        return net, trace

    probes = ds.X
    if cfg.monitor_probe_size:
        probes = np.vstack([probes, sample_inputs(net.n, cfg.monitor_probe_size, rng)])
    hidden0 = net.hidden(probes)

    W, B, M = net.W, net.B, net.M
    bb = np.array([net.b])
    X = np.ascontiguousarray(ds.X)
    y = np.ascontiguousarray(ds.y)
    pre = np.empty(net.hidden_width)
    v = np.empty(net.hidden_width)
    rec_buf = np.empty(0, dtype=np.int64)
    max_updates = cfg.max_updates if cfg.max_updates is not None else 2**62
    if cfg.record_updates:
        rec_buf = np.empty(min(max_updates, RECORD_CAP), dtype=np.int64)
    cadence = cfg.log_cadence
    next_log = cadence
    t = 0

    def sync():
        net.b = float(bb[0])

    def monitor() -> MonitorRecord:
        sync()
        now = net.hidden(probes)
        diff = now - hidden0
        d = float(np.sqrt((diff * diff).sum(axis=1)).max())
        R_t = float(np.sqrt((now * now).sum(axis=1).max() + 1.0))
        rec = MonitorRecord(t, float(np.linalg.norm(M)), d, R_t, cfg.drift_bound(t), cfg.M_bound(t))
        if cfg.enforce_bounds:
            if not rec.max_drift <= rec.drift_bound:
                raise BoundViolation(f"drift {rec.max_drift:.6g} > bound {rec.drift_bound:.6g} at t={t}")
            if not rec.M_norm <= rec.M_bound:
                raise BoundViolation(f"||M|| {rec.M_norm:.6g} > bound {rec.M_bound:.6g} at t={t}")
        return rec

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(ds)) if cfg.shuffle_each_epoch else np.arange(len(ds))
        pos = 0
        epoch_updates = 0
        stop = None
        while pos < len(order):
            budget = min(next_log, max_updates) - t
            pos, applied, code = _kernels.sgd_segment(
                W, B, M, bb, X, y, order, pos, cfg.h, cfg.beta, cfg.frozen_hidden, budget, pre, v,
                rec_buf, t,
            )
            t += applied
            epoch_updates += applied
            if code == _kernels.NON_FINITE:
                sync()
                raise TrainingDiverged(f"non-finite score at update {t} (epoch {epoch})")
            if code == _kernels.BUDGET_HIT:
                if t >= max_updates:
                    stop = MAX_UPDATES
                    break
                trace.monitors.append(monitor())
                next_log += cadence
        sync()
        if not net.is_finite():
            raise TrainingDiverged(f"non-finite weights after update {t} (epoch {epoch})")
        last = stop is not None or epoch == cfg.max_epochs or (cfg.stop_at_zero_loss and epoch_updates == 0)
        rec = EpochRecord(epoch, t, train_error(net, ds))
        if true_error_fn is not None and (last or eval_epoch is None or eval_epoch(epoch)):
            mon = monitor()
            rec.true_error = float(true_error_fn(net))
            rec.M_norm, rec.max_drift, rec.drift_bound = mon.M_norm, mon.max_drift, mon.drift_bound
        trace.epochs.append(rec)
        if stop is not None:
            trace.status = stop
            break
        if cfg.stop_at_zero_loss and epoch_updates == 0:
            trace.status = ZERO_LOSS_EPOCH
            break
    else:
        trace.status = MAX_EPOCHS
    if trace.epochs and (not trace.monitors or trace.monitors[-1].t != t):
        trace.monitors.append(monitor())
    trace.updates = t
    if cfg.record_updates:
        trace.update_indices = rec_buf[: min(t, len(rec_buf))].copy()
    sync()
    log.debug("training stopped: %s after %d updates, %d epochs", trace.status, t, len(trace.epochs))
    return net, trace
