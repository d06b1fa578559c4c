import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hostquality.errors import ConfigError, DomainError
from hostquality.learner import (
    DecisionTree, best_split, load_model, predict_posterior, predict_tree, save_model,
    train_bagging, train_tree,
)


def H(counts):
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c)


def scan_gain_ratio(x, y):
    """Gain and gain ratio of every midpoint threshold on one feature, by hand."""
    labels = sorted(set(y))
    out = []
    xs = sorted(set(x))
    for lo, hi in zip(xs, xs[1:]):
        thr = (lo + hi) / 2
        left = [c for v, c in zip(x, y) if v <= thr]
        right = [c for v, c in zip(x, y) if v > thr]
        n = len(y)
        gain = H([y.count(c) for c in labels]) - (
            len(left) / n * H([left.count(c) for c in labels])
            + len(right) / n * H([right.count(c) for c in labels])
        )
        split = H([len(left), len(right)])
        out.append((thr, gain, gain / split))
    return out


def leaf_tree(counts, classes):
    return DecisionTree(
        classes=np.array(classes), n_features=1, feature=np.array([-1]),
        threshold=np.array([0.0]), left=np.array([-1]), right=np.array([-1]),
        counts=np.array([counts]),
    )


def separable(rng, n, margin=0.1):
    pts = []
    while len(pts) < n:
        p = rng.uniform(-1, 1, 2)
        if abs(p @ [1, 2]) / math.sqrt(5) >= margin:
            pts.append(p)
    X = np.array(pts)
    return X, (X @ [1, 2] > 0).astype(int)


def test_single_class_is_one_leaf():
    t = train_tree(np.arange(6.0)[:, None], ["A"] * 6)
    assert t.n_nodes == 1
    assert predict_tree(t, [3.0]).tolist() == [1.0]


def test_one_dimensional_split_matches_scan():
    x, y = [1.0, 2.0, 3.0, 4.0], ["A", "A", "B", "B"]
    scan = scan_gain_ratio(x, y)
    mean_gain = sum(g for _, g, _ in scan if g > 0) / sum(1 for _, g, _ in scan if g > 0)
    thr, _, _ = max((s for s in scan if s[1] >= mean_gain), key=lambda s: s[2])
    assert thr == 2.5
    t = train_tree(np.array(x)[:, None], y)
    assert t.feature[0] == 0 and t.threshold[0] == 2.5
    assert t.counts[t.left[0]].tolist() == [2, 0]
    assert t.counts[t.right[0]].tolist() == [0, 2]


def _stump_accuracies(X, y):
    for j in range(X.shape[1]):
        for thr in np.unique(X[:, j]):
            left = X[:, j] <= thr
            for a, b in itertools.product(set(y), repeat=2):
                yield np.mean(np.where(left, a, b) == y)


def _depth2_accuracies(X, y):
    thresholds = [(j, thr) for j in range(X.shape[1]) for thr in np.unique(X[:, j])]
    labels = sorted(set(y))
    for (j0, t0), (j1, t1), (j2, t2) in itertools.product(thresholds, repeat=3):
        root = X[:, j0] <= t0
        inner = np.where(root, X[:, j1] <= t1, X[:, j2] <= t2)
        for leaves in itertools.product(labels, repeat=4):
            pred = np.select(
                [root & inner, root & ~inner, ~root & inner, ~root & ~inner], leaves
            )
            yield np.mean(pred == y)


def test_xor_needs_and_reaches_depth_two():
    # XOR about the centre (1.5, 1.5); off-grid so a greedy first split has positive gain
    X = np.array([[0.0, 0.0], [3.0, 3.0], [1.0, 2.0], [2.0, 1.0]])
    y = np.array([0, 0, 1, 1])
    assert max(_stump_accuracies(X, y)) < 1.0
    assert max(_depth2_accuracies(X, y)) == 1.0
    t = train_tree(X, y, min_leaf=1)
    assert t.depth() == 2
    assert np.array_equal(t.classes[t.predict_proba(X).argmax(axis=1)], y)


def test_laplace_leaf():
    t = leaf_tree([4, 0], ["A", "B"])
    np.testing.assert_allclose(predict_tree(t, [0.0]), [5 / 6, 1 / 6], atol=1e-15)


def test_predict_dimension_check():
    t = train_tree(np.eye(3), [0, 1, 1])
    with pytest.raises(DomainError):
        predict_tree(t, [1.0, 2.0])


def test_train_input_errors():
    with pytest.raises(DomainError):
        train_tree(np.zeros((0, 2)), [])
    with pytest.raises(DomainError):
        train_tree(np.zeros((3, 2)), [0, 1])
    with pytest.raises(ConfigError):
        train_bagging(np.zeros((3, 2)), [0, 1, 1], n_trees=0)


def test_posterior_is_mean_of_trees():
    e = train_bagging(np.eye(2), [0, 1], n_trees=2, seed=0)
    e.trees = [leaf_tree([3, 0], [0, 1]), leaf_tree([1, 2], [0, 1])]
    e.n_features = 1
    np.testing.assert_allclose(predict_posterior(e, [0.0]), [0.6, 0.4], atol=1e-15)
    e.trees = [leaf_tree([5], [0]) for _ in range(3)]
    e.classes = np.array([0])
    assert predict_posterior(e, [0.0]).tolist() == [1.0]


def test_single_tree_ensemble_equals_its_tree(rng):
    X, y = separable(rng, 60)
    e = train_bagging(X, y, n_trees=1, seed=3)
    assert np.array_equal(predict_posterior(e, X), e.trees[0].predict_proba(X))


def test_bagging_deterministic(rng):
    X, y = separable(rng, 80)
    a = train_bagging(X, y, n_trees=15, seed=9)
    b = train_bagging(X, y, n_trees=15, seed=9)
    assert all(ta.same_structure(tb) and np.array_equal(ta.threshold, tb.threshold)
               for ta, tb in zip(a.trees, b.trees))
    assert np.array_equal(predict_posterior(a, X), predict_posterior(b, X))
    c = train_bagging(X, y, n_trees=15, seed=10)
    assert not np.array_equal(predict_posterior(a, X), predict_posterior(c, X))


def test_bagging_separable_training_accuracy(rng):
    X, y = separable(rng, 200)
    e = train_bagging(X, y, n_trees=90, seed=1)
    pred = e.classes[predict_posterior(e, X).argmax(axis=1)]
    assert np.mean(pred == y) == 1.0


def test_pure_signal_single_tree(rng):
    X = rng.normal(size=(120, 4))
    y = np.digitize(X[:, 2], [-0.5, 0.0, 0.7])
    t = train_tree(X, y, min_leaf=1)
    assert np.mean(t.classes[t.predict_proba(X).argmax(axis=1)] == y) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 3))
def test_monotone_invariance_and_leaf_sizes(seed, k, min_leaf):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    X[:, 1] = np.round(X[:, 1], 1)  # some repeated values
    y = rng.integers(0, k, size=40)
    t = train_tree(X, y, min_leaf=min_leaf)
    Z = np.column_stack([np.exp(X[:, 0]), X[:, 1] ** 3 + 5 * X[:, 1], np.arctan(X[:, 2])])
    u = train_tree(Z, y, min_leaf=min_leaf)
    assert t.same_structure(u)
    assert np.array_equal(t.leaf_index(X), u.leaf_index(Z))
    leaves = t.feature < 0
    assert np.all(t.counts[leaves].sum(axis=1) >= min_leaf)
    assert np.all(np.isfinite(t.threshold))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_posteriors_on_simplex(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    y = rng.choice([0, 3, 5, 7], size=50)
    e = train_bagging(X, y, n_trees=5, seed=seed)
    P = predict_posterior(e, rng.normal(size=(200, 3)) * 3)
    assert np.all(P >= 0)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12, rtol=0)


def test_best_split_none_cases():
    X = np.array([[1.0], [1.0], [1.0], [1.0]])
    assert best_split(X, np.array([0, 1, 0, 1]), 2, 1) is None
    assert best_split(X[:3], np.array([0, 1, 0]), 2, 2) is None


def test_model_round_trip(rng, tmp_path):
    X = rng.normal(size=(100, 4))
    y = rng.choice([0, 3, 4, 7], size=100)
    e = train_bagging(X, y, n_trees=7, seed=2, feature_names=("a", "b", "c", "d"))
    path = tmp_path / "model.txt"
    with open(path, "w") as fh:
        save_model(fh, e)
    back = load_model(path)
    assert back.feature_names == ("a", "b", "c", "d")
    assert back.classes.tolist() == [0, 3, 4, 7] and back.seed == 2
    for ta, tb in zip(e.trees, back.trees):
        assert ta.same_structure(tb) and np.array_equal(ta.threshold, tb.threshold)
    Q = rng.normal(size=(300, 4))
    assert np.array_equal(predict_posterior(e, Q), predict_posterior(back, Q))
    buf = io.StringIO()
    save_model(buf, back)
    assert buf.getvalue() == path.read_text()


def test_model_bad_file(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("something-else\t1\n")
    with pytest.raises(Exception, match="model"):
        load_model(p)
