"""Compiled inner loops for the perceptron scan and per-sample SGD.

Both kernels accumulate dot products left to right in the same order, so a
frozen-hidden SGD run and a perceptron run on the cached embedding make
identical guard decisions and produce bit-identical output weights.
"""
from __future__ import annotations

import numba
import numpy as np

# segment exit codes
END_OF_ORDER = 0
BUDGET_HIT = 1
NON_FINITE = 2


@numba.njit(cache=True)
def _dot(a, v):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * v[i]
    return acc


@numba.njit(cache=True)
def perceptron_scan(P, y, h, beta, w, start, max_updates, rec):
    """Cyclic modified-perceptron scan from index ``start``.

    Mutates ``w``.  Stops after len(P) consecutive non-violations
    (converged) or at a violation once ``max_updates`` have been applied.
    ``rec`` receives the index of every update when it is long enough.
    Returns (updates, converged).
    """
    k = P.shape[0]
    d = P.shape[1]
    j = start
    since = 0
    t = 0
    while since < k:
        s = _dot(w, P[j])
        if y[j] * s <= beta:
            if t >= max_updates:
                return t, False
            coef = y[j] * h
            for i in range(d):
                w[i] += coef * P[j, i]
            if t < rec.shape[0]:
                rec[t] = j
            t += 1
            since = 0
        else:
            since += 1
        j += 1
        if j == k:
            j = 0
    return t, True


@numba.njit(cache=True)
def sgd_segment(W, B, M, bb, X, y, order, pos, h, beta, frozen, budget, pre, v, rec, t0):
    """Hinge-loss SGD over ``order[pos:]`` with simultaneous four-part updates.

    ``bb`` is a length-1 array holding the output bias.  ``pre`` and ``v`` are
    scratch buffers of the hidden width.  Stops at the end of ``order`` or at a
    violating sample once ``budget`` updates were applied (that sample is left
    unprocessed).  ``rec[t0 + k]`` receives the sample index of the k-th
    applied update while it fits.  Returns (next_pos, applied, exit_code).
    """
    width = W.shape[0]
    n = W.shape[1]
    applied = 0
    p = pos
    while p < order.shape[0]:
        s_idx = order[p]
        x = X[s_idx]
        for i in range(width):
            acc = 0.0
            for jj in range(n):
                acc += W[i, jj] * x[jj]
            pre[i] = acc + B[i]
            v[i] = pre[i] if pre[i] > 0.0 else 0.0
        score = _dot(M, v) + bb[0]
        if not np.isfinite(score):
            return p, applied, NON_FINITE
        yy = y[s_idx]
        if yy * score <= beta:
            if applied >= budget:
                return p, applied, BUDGET_HIT
            coef = yy * h
            if not frozen:
                for i in range(width):
                    if pre[i] > 0.0:  # Heaviside with H(0) = 0
                        g = coef * M[i]
                        for jj in range(n):
                            W[i, jj] += g * x[jj]
                        B[i] += g
            for i in range(width):
                M[i] += coef * v[i]
            bb[0] += coef
            if t0 + applied < rec.shape[0]:
                rec[t0 + applied] = s_idx
            applied += 1
        p += 1
    return p, applied, END_OF_ORDER
