"""Bagged C4.5-style decision trees producing smoothed class posteriors.

Trees split on numeric thresholds chosen by gain ratio, restricted to
splits whose information gain is at least the mean gain of all
positive-gain candidates at that node. Trees are unpruned; leaves keep raw
class counts and predict Laplace-smoothed distributions.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, FormatError

MODEL_MAGIC = "hostquality-model"
MODEL_VERSION = 1
_EPS = 1e-12


@dataclass(frozen=True)
class LearnerParams:
    n_trees: int = 90
    min_leaf: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            raise ConfigError(f"min_leaf must be >= 1, got {self.min_leaf}")


@dataclass(eq=False)
class DecisionTree:
    """Flat node table; node 0 is the root and ``feature == -1`` marks a leaf."""

    classes: np.ndarray
    n_features: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    def depth(self, node=0):
        if self.feature[node] < 0:
            return 0
        return 1 + max(self.depth(self.left[node]), self.depth(self.right[node]))

    def leaf_index(self, X):
        X = _as_matrix(X, self.n_features)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] >= 0
        return node

    def predict_proba(self, X):
        leaf = self.counts[self.leaf_index(X)].astype(float)
        k = len(self.classes)
        return (leaf + 1.0) / (leaf.sum(axis=1, keepdims=True) + k)

    def same_structure(self, other):
        return (
            np.array_equal(self.feature, other.feature)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.counts, other.counts)
        )


def _as_matrix(X, n_features):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise DomainError(f"expected {n_features} features, got shape {X.shape}")
    return X


def _xlogx_table(m):
    """``c * log2(c)`` for integer counts ``0..m``."""
    c = np.arange(m + 1, dtype=float)
    out = np.zeros(m + 1)
    out[1:] = c[1:] * np.log2(c[1:])
    return out


def best_split(X, y, k, min_leaf):
    """Best ``(feature, threshold, gain_ratio)`` for one node, or None.

    ``y`` holds class codes ``0..k-1``. Candidates are midpoints between
    consecutive distinct sorted values leaving at least ``min_leaf`` rows
    on each side.
    """
    m, p = X.shape
    if m < 2 * min_leaf:
        return None
    # constant columns cannot split; column ids map back through ``cols``
    cols = np.flatnonzero(X.min(axis=0) < X.max(axis=0))
    if cols.size == 0:
        return None
    X = X[:, cols]
    p = cols.size
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = y[order]
    onehot = np.zeros((m, p, k), dtype=np.int32)
    np.put_along_axis(onehot, ys[..., None], 1, axis=2)
    left = np.cumsum(onehot, axis=0)[:-1]
    total = np.bincount(y, minlength=k)

    n_left = np.arange(1, m)[:, None]
    n_right = m - n_left
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None

    # n*H(counts) = n log n - sum c log c, all on integer counts
    xlogx = _xlogx_table(m)
    weighted_left = xlogx[n_left] - xlogx[left].sum(axis=-1)
    weighted_right = xlogx[n_right] - xlogx[total - left].sum(axis=-1)
    h_node = (xlogx[m] - xlogx[total].sum()) / m
    gain = h_node - (weighted_left + weighted_right) / m
    frac = n_left / m
    split_info = -(frac * np.log2(frac) + (1 - frac) * np.log2(1 - frac))

    cand = valid & (gain > _EPS)
    if not cand.any():
        return None
    mean_gain = gain[cand].mean()
    eligible = cand & (gain >= mean_gain - _EPS)
    ratio = np.where(eligible, gain / split_info, -np.inf)
    best = ratio.max()
    # lowest feature index, then lowest threshold, among (near-)ties
    pos, feat = np.nonzero(ratio >= best - _EPS)
    first = np.lexsort((pos, feat))[0]
    i, j = pos[first], feat[first]
    lo, hi = xs[i, j], xs[i + 1, j]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return int(cols[j]), float(thr), float(best)


def train_tree(X, y, min_leaf=2, classes=None):
    """Grow one unpruned tree. ``classes`` fixes the leaf-count layout (default: labels in y)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0 or X.shape[1] == 0:
        raise DomainError("training needs a nonempty 2-D feature matrix")
    if len(y) != len(X):
        raise DomainError(f"{len(X)} rows but {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise DomainError("feature values must be finite")
    classes = np.unique(y) if classes is None else np.asarray(classes)
    codes = np.searchsorted(classes, y)
    if np.any(codes >= len(classes)) or np.any(classes[np.minimum(codes, len(classes) - 1)] != y):
        raise DomainError("labels outside the declared class set")
    k = len(classes)

    feature, threshold, left, right, counts = [], [], [], [], []

    def grow(rows):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(codes[rows], minlength=k))
        if np.count_nonzero(counts[node]) <= 1:
            return node
        split = best_split(X[rows], codes[rows], k, min_leaf)
        if split is None:
            return node
        j, thr, _ = split
        go_left = X[rows, j] <= thr
        feature[node] = j
        threshold[node] = thr
        left[node] = grow(rows[go_left])
        right[node] = grow(rows[~go_left])
        return node

    grow(np.arange(len(X)))
    return DecisionTree(
        classes=classes,
        n_features=X.shape[1],
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64).reshape(len(feature), k),
    )


def predict_tree(t, x):
    """Smoothed class distribution for one sample (or rows of a matrix)."""
    proba = t.predict_proba(x)
    return proba[0] if np.ndim(x) == 1 else proba


@dataclass(eq=False)
class BaggedEnsemble:
    trees: list
    classes: np.ndarray
    n_features: int
    seed: int
    min_leaf: int = 2
    feature_names: tuple = field(default=())

    @property
    def n_trees(self):
        return len(self.trees)


def train_bagging(X, y, n_trees=90, seed=0, min_leaf=2, feature_names=()):
    """Each tree sees a bootstrap resample drawn from its own spawned seed stream."""
    if n_trees < 1:
        raise ConfigError(f"n_trees must be >= 1, got {n_trees}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if len(X) < 2:
        raise DomainError("bagging needs at least two training samples")
    classes = np.unique(y)
    n = len(y)
    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rows = np.random.default_rng(child).integers(0, n, size=n)
        trees.append(train_tree(X[rows], y[rows], min_leaf=min_leaf, classes=classes))
    return BaggedEnsemble(trees, classes, X.shape[1], seed, min_leaf, tuple(feature_names))


def predict_posterior(e, X):
    """Unweighted mean of the trees' smoothed distributions, columns ordered as ``e.classes``."""
    single = np.ndim(X) == 1
    X = _as_matrix(X, e.n_features)
    acc = np.zeros((len(X), len(e.classes)))
    for t in e.trees:
        acc += t.predict_proba(X)
    acc /= len(e.trees)
    acc /= acc.sum(axis=1, keepdims=True)
    return acc[0] if single else acc


def save_model(fh, e):
    """Write a self-describing text model; floats use repr for exact round-trip."""
    w = fh.write
    w(f"{MODEL_MAGIC}\t{MODEL_VERSION}\n")
    w("classes\t" + "\t".join(str(int(c)) for c in e.classes) + "\n")
    w(f"n_features\t{e.n_features}\n")
    w(f"seed\t{e.seed}\n")
    w(f"min_leaf\t{e.min_leaf}\n")
    w("feature_names\t" + "\t".join(e.feature_names) + "\n")
    w(f"n_trees\t{e.n_trees}\n")
    for ti, t in enumerate(e.trees):
        w(f"tree\t{ti}\t{t.n_nodes}\n")
        w("# node\tfeature\tthreshold\tleft\tright\tcounts\n")
        for i in range(t.n_nodes):
            counts = ",".join(str(int(c)) for c in t.counts[i])
            w(f"{i}\t{t.feature[i]}\t{float(t.threshold[i])!r}\t{t.left[i]}\t{t.right[i]}\t{counts}\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    try:
        return _parse_model(lines)
    except (ValueError, IndexError, KeyError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: malformed model file ({exc})") from None


def _parse_model(lines):
    it = iter(lines)
    magic, version = next(it).split("\t")
    if magic != MODEL_MAGIC or int(version) != MODEL_VERSION:
        raise FormatError(f"not a version-{MODEL_VERSION} model file")
    header = {}
    for _ in range(6):
        key, *vals = next(it).split("\t")
        header[key] = vals
    classes = np.array([int(c) for c in header["classes"]])
    n_features = int(header["n_features"][0])
    names = tuple(v for v in header["feature_names"] if v)
    trees = []
    for _ in range(int(header["n_trees"][0])):
        tag, _, n_nodes = next(it).split("\t")
        if tag != "tree":
            raise FormatError(f"expected tree record, got {tag!r}")
        rows = [next(it).split("\t") for _ in range(int(n_nodes))]
        trees.append(DecisionTree(
            classes=classes,
            n_features=n_features,
            feature=np.array([int(r[1]) for r in rows], dtype=np.int64),
            threshold=np.array([float(r[2]) for r in rows]),
            left=np.array([int(r[3]) for r in rows], dtype=np.int64),
            right=np.array([int(r[4]) for r in rows], dtype=np.int64),
            counts=np.array([[int(c) for c in r[5].split(",")] for r in rows],
                            dtype=np.int64).reshape(len(rows), len(classes)),
        ))
    return BaggedEnsemble(trees, classes, n_features, int(header["seed"][0]),
                          int(header["min_leaf"][0]), names)
