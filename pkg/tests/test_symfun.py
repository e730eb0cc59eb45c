import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symnet.rng import make_rng
from symnet.symfun import (
    CLEAN,
    INPUT_PERTURBED,
    LABEL_FLIPPED,
    Dataset,
    SymmetricFunction,
    all_inputs,
    evaluate,
    flip_labels,
    hamming_weight,
    majority_support,
    parity_support,
    perturb_inputs,
    random_symfun,
    read_dataset_csv,
    sample_dataset,
    weight_representatives,
    write_dataset_csv,
)


@st.composite
def symfuns(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    support = draw(st.frozensets(st.integers(0, n)))
    return SymmetricFunction(n, support)


def test_parity_is_even_weights():
    f = parity_support(4)
    assert f.support == {0, 2, 4}
    assert f([1, 1, 0, 0]) == 1
    assert f([1, 1, 1, 0]) == -1


def test_majority_tie_is_negative():
    f = majority_support(4)
    assert f.support == {3, 4}
    assert f([1, 1, 0, 0]) == -1
    assert majority_support(5).support == {3, 4, 5}


def test_empty_and_full_support():
    assert SymmetricFunction(3, frozenset()).weight_labels().tolist() == [-1] * 4
    assert SymmetricFunction(3, frozenset(range(4))).weight_labels().tolist() == [1] * 4


def test_support_out_of_range_rejected():
    with pytest.raises(ValueError):
        SymmetricFunction(3, frozenset({4}))
    with pytest.raises(ValueError):
        SymmetricFunction(3, frozenset({-1}))


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        evaluate(parity_support(3), [1, 0])
    with pytest.raises(ValueError):
        parity_support(3).labels(np.zeros((2, 4)))


@given(symfuns(max_n=8))
def test_value_depends_only_on_weight(f):
    X = all_inputs(f.n)
    labels = f.labels(X)
    for x, lab in zip(X, labels):
        assert lab == f.label_of_weight(hamming_weight(x))
        assert lab == f(x)
        perm = np.random.default_rng(0).permutation(f.n)
        assert f(x[perm]) == lab


def test_all_inputs_enumerates_cube():
    X = all_inputs(3)
    assert X.shape == (8, 3)
    assert {tuple(r) for r in X} == set(itertools.product((0.0, 1.0), repeat=3))


def test_weight_representatives():
    R = weight_representatives(3)
    assert R.tolist() == [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]]
    assert weight_representatives(3, [2]).tolist() == [[1, 1, 0]]


def test_random_symfun_reproducible_and_balanced():
    a = random_symfun(30, make_rng(5, "target"))
    b = random_symfun(30, make_rng(5, "target"))
    assert a == b
    sizes = [len(random_symfun(30, make_rng(s)).support) for s in range(200)]
    assert abs(np.mean(sizes) - 15.5) < 1.0


def test_streams_differ_by_key():
    x = make_rng(1, "data", 30).random(4)
    y = make_rng(1, "data", 31).random(4)
    assert not np.array_equal(x, y)


def test_sample_dataset_labels_match_target():
    f = parity_support(10)
    ds = sample_dataset(f, 50, make_rng(0))
    assert ds.provenance == CLEAN
    assert ds.X.shape == (50, 10)
    assert np.array_equal(ds.y, f.labels(ds.X))
    assert np.array_equal(ds.weights, ds.X.sum(axis=1))
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0


def test_flip_labels_rate_and_weights():
    f = majority_support(9)
    ds = sample_dataset(f, 20_000, make_rng(0))
    noisy = flip_labels(ds, 0.1, make_rng(1))
    assert noisy.provenance == LABEL_FLIPPED and noisy.level == 0.1
    rate = np.mean(noisy.y != ds.y)
    assert abs(rate - 0.1) < 0.01
    assert np.array_equal(noisy.X, ds.X)
    assert flip_labels(ds, 0.0, make_rng(1)).y.tolist() == ds.y.tolist()
    with pytest.raises(ValueError):
        flip_labels(ds, 1.5, make_rng(1))


def test_perturb_inputs_bounded_and_keeps_labels():
    ds = sample_dataset(parity_support(8), 500, make_rng(0))
    pert = perturb_inputs(ds, 0.1, make_rng(2))
    assert pert.provenance == INPUT_PERTURBED
    assert np.max(np.abs(pert.X - ds.X)) <= 0.1
    assert np.array_equal(pert.y, ds.y)
    assert np.array_equal(pert.weights, ds.weights)
    with pytest.raises(ValueError):
        perturb_inputs(ds, -0.1, make_rng(2))


def test_dataset_rejects_bad_labels():
    with pytest.raises(ValueError):
        Dataset(2, np.zeros((1, 2)), np.array([0.0]))
    with pytest.raises(ValueError):
        Dataset(2, np.zeros((2, 2)), np.array([1.0]))


def test_csv_round_trip(tmp_path):
    ds = sample_dataset(parity_support(5), 12, make_rng(3))
    path = tmp_path / "d.csv"
    write_dataset_csv(ds, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x_0,x_1,x_2,x_3,x_4,label"
    assert lines[1].split(",")[-1] in {"+1", "-1"}
    back = read_dataset_csv(path)
    assert np.array_equal(back.X, ds.X) and np.array_equal(back.y, ds.y)


def test_csv_round_trip_perturbed(tmp_path):
    ds = perturb_inputs(sample_dataset(parity_support(4), 6, make_rng(3)), 0.1, make_rng(4))
    path = tmp_path / "d.csv"
    write_dataset_csv(ds, path)
    assert np.array_equal(read_dataset_csv(path).X, ds.X)
