"""Base classifiers and univariate feature selection.

The forest is CART with Gini impurity on bootstrap samples; leaves keep the
class distribution of their training rows and the forest averages them.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from gwbowv.errors import ToolkitError

# cap on the (rows x features) block materialised per split search
_SPLIT_BLOCK = 2_000_000


@dataclass
class ForestConfig:
    n_trees: int = 20
    max_depth: int | None = None
    min_samples_leaf: int = 1
    min_impurity_decrease: float = 0.0
    bootstrap: bool = True
    seed: int = 0

    def validate(self):
        if self.n_trees < 1:
            raise ToolkitError("bad_config", "forest.n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ToolkitError("bad_config", "forest.min_samples_leaf must be >= 1")


def _check_labeled(X, y, n_classes):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[0] != y.shape[0]:
        raise ToolkitError("bad_data", f"X {X.shape} and y {y.shape} are not row aligned")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if y.min() < 0 or y.max() >= n_classes:
        raise ToolkitError("bad_data", f"labels must lie in 0..{n_classes - 1}")
    return X, y, n_classes


class DecisionTree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)  # (n_nodes, n_classes); zero rows for inner nodes

    @property
    def n_nodes(self):
        return self.feature.size

    def apply(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] >= 0
        return node

    def predict_proba(self, X):
        return self.value[self.apply(X)]

    def to_dict(self):
        leaves = np.flatnonzero(self.feature < 0)
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaves": {
                str(int(i)): [[int(c), float(self.value[i, c])] for c in np.flatnonzero(self.value[i])]
                for i in leaves
            },
        }

    @classmethod
    def from_dict(cls, data, n_classes):
        n = len(data["feature"])
        value = np.zeros((n, n_classes))
        for node, pairs in data["leaves"].items():
            for c, p in pairs:
                value[int(node), c] = p
        return cls(data["feature"], data["threshold"], data["left"], data["right"], value)


def _best_split(X, rows, y, features, n_classes, min_leaf):
    """Best Gini split of ``X[rows]`` over ``features``: returns ``(score, feature, threshold)`` or None.

    Maximises ``sum(l^2)/n_l + sum(r^2)/n_r`` over class counts, which is the
    same as minimising the size-weighted child impurity. Sums of squared
    counts are updated incrementally along each sorted column.
    """
    n = y.size
    total = np.bincount(y, minlength=n_classes).astype(np.float64)
    starts = np.concatenate([[0], np.cumsum(total)[:-1]]).astype(np.int64)
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    size_ok = (nl >= min_leaf) & (nr >= min_leaf)
    ranks = np.arange(n)[:, None]
    sum_t2 = float(total @ total)
    best = None
    step = max(1, _SPLIT_BLOCK // n)
    for start in range(0, len(features), step):
        feats = features[start:start + step]
        F = len(feats)
        Xf = X[rows[:, None], feats[None, :]]
        order = np.argsort(Xf, axis=0, kind="stable")
        xs = np.take_along_axis(Xf, order, 0)
        ys = y[order]
        # occurrences of the same class earlier in the sorted column
        by_class = np.argsort(ys, axis=0, kind="stable")
        prev = np.empty((n, F), dtype=np.int64)
        np.put_along_axis(prev, by_class, ranks - starts[np.take_along_axis(ys, by_class, 0)], 0)
        s_left = np.cumsum(2 * prev + 1, axis=0)[:-1]
        cross = np.cumsum(total[ys], axis=0)[:-1]
        score = s_left / nl + (sum_t2 - 2.0 * cross + s_left) / nr
        valid = (xs[1:] > xs[:-1]) & size_ok
        if not valid.any():
            continue
        score = np.where(valid, score, -np.inf)
        flat = int(np.argmax(score))
        pos, j = divmod(flat, F)
        s = score[pos, j]
        if best is None or s > best[0]:
            thr = 0.5 * (xs[pos, j] + xs[pos + 1, j])
            if not thr < xs[pos + 1, j]:  # midpoint rounded up onto the right value
                thr = xs[pos, j]
            best = (float(s), int(feats[j]), float(thr))
    return best


def grow_tree(X, y, n_classes, max_features, rng, max_depth=None, min_samples_leaf=1, min_impurity_decrease=0.0):
    """Grow one CART tree depth-first.

    A node becomes a leaf when it is pure, too small, at ``max_depth``, or
    when its best split lowers Gini impurity by no more than
    ``min_impurity_decrease`` (so zero-gain splits are never taken).
    """
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(None)
        return len(feature) - 1

    m = X.shape[1]
    root = new_node()
    stack = [(root, np.arange(y.size), 1)]
    while stack:
        node, rows, depth = stack.pop()
        yn = y[rows]
        counts = np.bincount(yn, minlength=n_classes)
        present = np.flatnonzero(counts)
        splittable = (
            present.size > 1
            and rows.size >= 2 * min_samples_leaf
            and (max_depth is None or depth < max_depth)
        )
        split = None
        if splittable:
            # remap to the classes present so the count tensors stay small
            local = np.searchsorted(present, yn)
            perm = rng.permutation(m)
            split = _best_split(X, rows, local, perm[:max_features], present.size, min_samples_leaf)
            if split is None and m > max_features:
                # keep drawing, but only among columns that vary inside this node
                rest = perm[max_features:]
                block = X[rows[:, None], rest[None, :]]
                rest = rest[block.max(0) > block.min(0)]
                for start in range(0, rest.size, max_features):
                    split = _best_split(X, rows, local, rest[start:start + max_features], present.size, min_samples_leaf)
                    if split is not None:
                        break
        if split is not None:
            parent_score = float(counts @ counts) / rows.size
            if (split[0] - parent_score) / rows.size <= min_impurity_decrease + 1e-12:
                split = None
        if split is None:
            value[node] = counts / counts.sum()
            continue
        _, f, thr = split
        mask = X[rows, f] <= thr
        feature[node] = f
        threshold[node] = thr
        l, r = new_node(), new_node()
        left[node], right[node] = l, r
        stack.append((r, rows[~mask], depth + 1))
        stack.append((l, rows[mask], depth + 1))

    vals = np.zeros((len(feature), n_classes))
    for i, v in enumerate(value):
        if v is not None:
            vals[i] = v
    return DecisionTree(feature, threshold, left, right, vals)


class ForestModel:
    def __init__(self, trees, n_classes, n_features, config: ForestConfig):
        self.trees = trees
        self.n_classes = n_classes
        self.n_features = n_features
        self.config = config

    def predict_proba(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ToolkitError("dimension_mismatch", f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            out += tree.predict_proba(X)
        return out / len(self.trees)

    def predict(self, X):
        return self.predict_proba(X).argmax(1)

    def to_dict(self):
        return {
            "kind": "forest",
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "config": asdict(self.config),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, data):
        trees = [DecisionTree.from_dict(t, data["n_classes"]) for t in data["trees"]]
        return cls(trees, data["n_classes"], data["n_features"], ForestConfig(**data["config"]))


def train_forest(X, y, config=None, n_classes=None, workers=1, groups=None):
    """Fit a random forest.

    ``n_classes`` fixes the probability width when some labels are unseen.
    ``groups`` (one id per row) makes the bootstrap draw whole groups, so rows
    replicated from one document stay together.
    """
    config = config or ForestConfig()
    config.validate()
    X, y, n_classes = _check_labeled(X, y, n_classes)
    if np.unique(y).size < 2:
        raise ToolkitError("degenerate_labels", "training data has a single class")
    n, m = X.shape
    max_features = max(1, math.ceil(math.sqrt(m)))
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_trees)
    if groups is not None:
        groups = np.asarray(groups)
        if groups.shape != (n,):
            raise ToolkitError("bad_data", "groups must give one id per row")
        _, group_of = np.unique(groups, return_inverse=True)
        members = np.argsort(group_of, kind="stable")
        bounds = np.concatenate([[0], np.cumsum(np.bincount(group_of))])

    def one(seq):
        rng = np.random.default_rng(seq)
        if not config.bootstrap:
            rows = np.arange(n)
        elif groups is None:
            rows = rng.integers(0, n, n)
        else:
            drawn = rng.integers(0, bounds.size - 1, bounds.size - 1)
            rows = np.concatenate([members[bounds[g]:bounds[g + 1]] for g in drawn])
        return grow_tree(
            X[rows], y[rows], n_classes, max_features, rng,
            config.max_depth, config.min_samples_leaf, config.min_impurity_decrease,
        )

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            trees = list(pool.map(one, seeds))
    else:
        trees = [one(s) for s in seeds]
    return ForestModel(trees, n_classes, m, config)


def forest_proba(model: ForestModel, row):
    return model.predict_proba(np.asarray(row, dtype=np.float64)[None, :])[0]


class ConstantModel:
    """Stands in for a forest when a label block has a single observed class."""

    def __init__(self, proba, n_features):
        self.proba = np.asarray(proba, dtype=np.float64)
        self.n_classes = self.proba.size
        self.n_features = n_features

    def predict_proba(self, X):
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features:
            raise ToolkitError("dimension_mismatch", f"expected {self.n_features} features, got {X.shape[1]}")
        return np.tile(self.proba, (X.shape[0], 1))

    def to_dict(self):
        return {"kind": "constant", "proba": self.proba.tolist(), "n_features": self.n_features}

    @classmethod
    def from_dict(cls, data):
        return cls(data["proba"], data["n_features"])


class KnnModel:
    def __init__(self, X, y, n_classes, k):
        self.X = X
        self.y = y
        self.n_classes = n_classes
        self.k = k

    def predict_proba(self, Q):
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        if Q.shape[1] != self.X.shape[1]:
            raise ToolkitError("dimension_mismatch", f"expected {self.X.shape[1]} features, got {Q.shape[1]}")
        d2 = (Q * Q).sum(1)[:, None] - 2.0 * Q @ self.X.T + (self.X * self.X).sum(1)[None, :]
        dist = np.sqrt(np.maximum(d2, 0.0))
        out = np.zeros((Q.shape[0], self.n_classes))
        for i in range(Q.shape[0]):
            near = np.argsort(dist[i], kind="stable")[: self.k]
            dn = dist[i, near]
            exact = dn == 0.0
            if exact.any():
                # exact matches take all the mass
                w = exact.astype(np.float64)
            else:
                w = 1.0 / dn
            np.add.at(out[i], self.y[near], w)
            out[i] /= out[i].sum()
        return out

    def to_dict(self):
        return {"kind": "knn", "k": self.k, "n_classes": self.n_classes, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data["X"], dtype=np.float64), np.array(data["y"], dtype=np.int64), data["n_classes"], data["k"])


def train_knn(X, y, k_neighbors, n_classes=None):
    X, y, n_classes = _check_labeled(X, y, n_classes)
    if not 1 <= k_neighbors <= X.shape[0]:
        raise ToolkitError("bad_k", f"k_neighbors={k_neighbors} must lie in 1..{X.shape[0]}")
    return KnnModel(X, y, n_classes, k_neighbors)


def knn_proba(model: KnnModel, row):
    return model.predict_proba(np.asarray(row, dtype=np.float64)[None, :])[0]


def model_from_dict(data):
    kinds = {"forest": ForestModel, "constant": ConstantModel, "knn": KnnModel}
    try:
        return kinds[data["kind"]].from_dict(data)
    except KeyError:
        raise ToolkitError("bad_model", f"unknown model kind {data.get('kind')!r}") from None


ANOVA_EPS = 1e-12


def anova_f(X, y):
    """One-way ANOVA F per column, with ``eps`` added to the within-group sum of squares."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes, inv = np.unique(y, return_inverse=True)
    n, c = X.shape[0], classes.size
    if c < 2:
        raise ToolkitError("degenerate_labels", "ANOVA needs at least two classes")
    if n <= c:
        raise ToolkitError("bad_data", f"ANOVA needs n > c, got n={n}, c={c}")
    Xc = X - X.mean(0)
    sizes = np.bincount(inv, minlength=c).astype(np.float64)
    sums = np.zeros((c, X.shape[1]))
    np.add.at(sums, inv, Xc)
    means = sums / sizes[:, None]
    ssb = (sizes[:, None] * means * means).sum(0)
    ssw = ((Xc - means[inv]) ** 2).sum(0)
    return (ssb / (c - 1)) / ((ssw + ANOVA_EPS) / (n - c))


@dataclass
class AnovaSelector:
    indices: np.ndarray
    scores: np.ndarray
    n_features: int

    def transform(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ToolkitError("dimension_mismatch", f"expected {self.n_features} features, got {X.shape[1]}")
        return X[:, self.indices]

    def to_dict(self):
        return {"n_features": self.n_features, "indices": self.indices.tolist(), "scores": self.scores.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data["indices"], dtype=np.int64), np.array(data["scores"]), data["n_features"])


def anova_select(X, y, m_out):
    X = np.asarray(X, dtype=np.float64)
    if not 1 <= m_out <= X.shape[1]:
        raise ToolkitError("bad_m_out", f"m_out={m_out} must lie in 1..{X.shape[1]}")
    F = anova_f(X, y)
    order = np.lexsort((np.arange(F.size), -F))
    return AnovaSelector(order[:m_out].astype(np.int64), F, X.shape[1])


def apply_selector(selector: AnovaSelector, row):
    return selector.transform(row)[0]
