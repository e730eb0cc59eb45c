import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import sgd_step_scalar
from symnet.network import TwoLayerNetwork, embed, random_init, symmetric_init
from symnet.perceptron import LabeledPointSet, run_modified_perceptron
from symnet.rng import make_rng
from symnet.symfun import Dataset, parity_support, random_symfun, sample_dataset
from symnet.trainer import (
    APPLIED,
    MAX_EPOCHS,
    MAX_UPDATES,
    SKIPPED,
    TRACE_HEADER,
    ZERO_LOSS_EPOCH,
    BoundViolation,
    TrainConfig,
    TrainingDiverged,
    drift,
    hinge_loss,
    sgd_update,
    train,
    train_error,
)


def toy_net():
    return TwoLayerNetwork([[1.0]], [0.0], [0.5], 0.0)


def test_single_step_by_hand():
    net = toy_net()
    assert sgd_update(net, [1.0], 1.0, 0.1, 1.0) == APPLIED
    assert net.W[0, 0] == pytest.approx(1.05)
    assert net.B[0] == pytest.approx(0.05)
    assert net.M[0] == pytest.approx(0.6)
    assert net.b == pytest.approx(0.1)


def test_step_skipped_above_beta():
    net = toy_net()
    assert sgd_update(net, [1.0], 1.0, 0.1, 0.4) == SKIPPED
    assert net.M[0] == 0.5 and net.b == 0.0


def test_guard_is_inclusive_at_beta():
    net = toy_net()
    assert sgd_update(net, [1.0], 1.0, 0.1, 0.5) == APPLIED


def test_inactive_unit_at_zero_gets_no_hidden_update():
    net = TwoLayerNetwork([[1.0]], [-1.0], [2.0], 0.0)
    sgd_update(net, [1.0], 1.0, 0.1, 1.0)
    assert net.W[0, 0] == 1.0 and net.B[0] == -1.0  # pre-activation exactly 0
    assert net.M[0] == 2.0 and net.b == pytest.approx(0.1)


def test_frozen_hidden_touches_output_only():
    net = symmetric_init(3)
    W0, B0 = net.W.copy(), net.B.copy()
    sgd_update(net, [1, 1, 0], 1.0, 0.01, 1.0, frozen_hidden=True)
    assert np.array_equal(net.W, W0) and np.array_equal(net.B, B0)
    assert net.M.any() and net.b == 0.01


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 6), st.sampled_from([-1.0, 1.0]),
       st.floats(1e-3, 1.0), st.floats(0.0, 2.0))
def test_update_matches_scalar_loop(seed, n, width, y, h, beta):
    rng = make_rng(seed)
    net = random_init(n, width, 1.0, rng)
    x = rng.integers(0, 2, n).astype(float)
    ref = sgd_step_scalar(net.W.tolist(), net.B.tolist(), net.M.tolist(), net.b, x.tolist(), y, h, beta)
    status = sgd_update(net, x, y, h, beta)
    assert status == (SKIPPED if ref is None else APPLIED)
    if ref is not None:
        W, B, M, b = ref
        assert np.allclose(net.W, W, rtol=1e-12, atol=1e-14)
        assert np.allclose(net.B, B, rtol=1e-12, atol=1e-14)
        assert np.allclose(net.M, M, rtol=1e-12, atol=1e-14)
        assert net.b == pytest.approx(b, rel=1e-12, abs=1e-14)


def test_hinge_loss():
    assert hinge_loss(2.0, 1.0, 1.0) == 0.0
    assert hinge_loss(0.5, 1.0, 1.0) == 0.5
    assert hinge_loss(0.5, -1.0, 0.0) == 0.5
    with pytest.raises(ValueError):
        hinge_loss(0.0, 1.0, -1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(h=0.0, beta=1.0)
    with pytest.raises(ValueError):
        TrainConfig(h=1.0, beta=-1.0)
    assert TrainConfig(h=1, beta=0, max_updates=12_345).log_cadence == 13


def test_compiled_loop_matches_reference():
    n = 6
    rng = make_rng(0)
    ds = sample_dataset(random_symfun(n, rng), 40, rng)
    net0 = random_init(n, 9, 1.0, rng)
    cfg = TrainConfig(h=0.05, beta=0.3, max_epochs=3, shuffle_each_epoch=False, stop_at_zero_loss=False)
    out, trace = train(net0, ds, cfg, rng)
    ref = net0.copy()
    applied = 0
    for _ in range(3):
        for x, y in ds:
            applied += sgd_update(ref, x, y, 0.05, 0.3) == APPLIED
    assert trace.updates == applied
    assert np.allclose(out.W, ref.W, atol=1e-12) and np.allclose(out.M, ref.M, atol=1e-12)
    assert out.b == pytest.approx(ref.b, abs=1e-12)


def test_train_leaves_input_untouched_and_stops():
    n = 8
    rng = make_rng(1)
    ds = sample_dataset(random_symfun(n, rng), 40, rng)
    net0 = symmetric_init(n)
    out, trace = train(net0, ds, TrainConfig(h=n**-3.0, beta=n**3 * n**-3.0, max_epochs=100_000), rng)
    assert not net0.M.any()
    assert trace.status == ZERO_LOSS_EPOCH
    assert trace.final_train_error == 0.0 == train_error(out, ds)
    assert trace.epochs[-1].updates == trace.updates
    assert [r.epoch for r in trace.epochs] == list(range(1, len(trace.epochs) + 1))


def test_max_updates_and_max_epochs():
    n = 8
    rng = make_rng(2)
    ds = sample_dataset(parity_support(n), 30, rng)
    _, tr = train(symmetric_init(n), ds, TrainConfig(h=1e-6, beta=1.0, max_updates=17), rng)
    assert tr.status == MAX_UPDATES and tr.updates == 17
    _, tr = train(symmetric_init(n), ds, TrainConfig(h=1e-6, beta=1.0, max_epochs=2), rng)
    assert tr.status == MAX_EPOCHS and len(tr.epochs) == 2
    _, tr = train(symmetric_init(n), ds, TrainConfig(h=1e-6, beta=1.0, max_epochs=0), rng)
    assert tr.epochs == [] and math.isnan(tr.final_train_error)


def test_divergence_detected():
    n = 4
    rng = make_rng(3)
    ds = sample_dataset(parity_support(n), 16, rng)
    with pytest.raises(TrainingDiverged):
        train(random_init(n, 8, 1.0, rng), ds, TrainConfig(h=1e200, beta=0.0, max_epochs=50), rng)


def test_bound_violation_raised():
    n = 6
    rng = make_rng(4)
    ds = sample_dataset(parity_support(n), 30, rng)
    cfg = TrainConfig(h=0.1, beta=1.0, max_epochs=20, log_every=1, bound_R=1e-6, bound_RX=1.0,
                      enforce_bounds=True)
    with pytest.raises(BoundViolation):
        train(symmetric_init(n), ds, cfg, rng)


def test_monitors_and_true_error_schedule():
    n = 10
    rng = make_rng(5)
    f = random_symfun(n, rng)
    ds = sample_dataset(f, 100, rng)
    R = n**1.5
    h = n**-6.0
    cfg = TrainConfig(h=h, beta=R * R * h, max_epochs=10**6, log_every=500, monitor_probe_size=50,
                      bound_R=R, bound_RX=math.sqrt(n), enforce_bounds=True)
    calls = []
    out, tr = train(symmetric_init(n), ds, cfg, rng, true_error_fn=lambda net: calls.append(1) or 0.0,
                    eval_epoch=lambda e: e % 10 == 0)
    assert tr.status == ZERO_LOSS_EPOCH
    assert tr.monitors[-1].t == tr.updates
    assert all(m.max_drift <= m.drift_bound and m.M_norm <= m.M_bound for m in tr.monitors)
    assert len(calls) == len(tr.epochs) // 10 + (len(tr.epochs) % 10 != 0)
    assert tr.final_true_error == 0.0


def test_drift_helper():
    net = symmetric_init(3)
    X = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    H0 = net.hidden(X)
    assert drift(net, H0, X) == 0.0
    net.B[0] += 3.0
    assert drift(net, H0, X) == 3.0
    assert drift(net, H0[:0], X[:0]) == 0.0


def test_frozen_training_replays_perceptron_exactly():
    n = 8
    rng = make_rng(6)
    ds = sample_dataset(random_symfun(n, rng), 60, rng)
    R, h = n**1.5, n**-6.0
    cfg = TrainConfig(h=h, beta=R * R * h, max_epochs=10**6, shuffle_each_epoch=False,
                      frozen_hidden=True, record_updates=True)
    net0 = symmetric_init(n)
    out, tr = train(net0, ds, cfg, rng)
    ps = LabeledPointSet(embed(net0, ds.X).points, ds.y)
    res = run_modified_perceptron(ps, h, R * R * h, max_updates=10**8, record=True)
    assert np.array_equal(tr.update_indices, res.update_indices)
    assert np.array_equal(np.append(out.M, out.b), res.w)


def test_trace_csv(tmp_path):
    n = 5
    rng = make_rng(7)
    ds = sample_dataset(parity_support(n), 20, rng)
    _, tr = train(symmetric_init(n), ds, TrainConfig(h=0.01, beta=1.0, max_epochs=3), rng,
                  true_error_fn=lambda net: 0.25)
    tr.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) == 1 + len(tr.epochs)


def test_dataset_dimension_checked():
    ds = Dataset(3, np.zeros((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        train(symmetric_init(4), ds, TrainConfig(h=1.0, beta=0.0), make_rng(0))
