"""Two-level ensemble over taxonomy paths.

Level one holds a path classifier (PP), a node classifier (NP) and one
classifier per depth (DNP_k, whose label set adds NONE for paths ending
above k). Their probability blocks are appended to the document vector,
reduced by ANOVA F and fed to the final path classifier (FPP).
"""

import logging
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from gwbowv import taxonomy as tx
from gwbowv.config import EnsembleConfig, derive_seed
from gwbowv.errors import ToolkitError
from gwbowv.learners import (
    AnovaSelector,
    ConstantModel,
    ForestConfig,
    anova_select,
    model_from_dict,
    train_forest,
)

log = logging.getLogger(__name__)


@dataclass
class BlockLayout:
    """One probability block: ``labels[i]`` is the PathId/NodeId (or NONE) of column ``offset + i``."""

    name: str
    offset: int
    labels: list[int]

    @property
    def size(self):
        return len(self.labels)

    def to_dict(self):
        return {"name": self.name, "offset": self.offset, "labels": self.labels}


def depth_training_set(path_labels, taxonomy, k, none_fraction=0.10, seed=0):
    """Rows for DNP_k as ``(doc_indices, labels)`` with labels NodeIds or :data:`taxonomy.NONE`.

    Every document whose path reaches depth ``k`` is kept; a seeded sample of
    ``ceil(none_fraction * #shorter)`` shorter-path documents is labelled NONE.
    """
    if not 0 <= none_fraction <= 1:
        raise ToolkitError("bad_config", f"none_fraction must lie in [0, 1], got {none_fraction}")
    labels = [taxonomy.node_label_at_depth(p, k) for p in path_labels]
    reach = [i for i, lab in enumerate(labels) if lab != tx.NONE]
    if not reach:
        raise ToolkitError("empty_depth", f"no document reaches depth {k}")
    shorter = np.array([i for i, lab in enumerate(labels) if lab == tx.NONE], dtype=np.int64)
    n_none = math.ceil(none_fraction * shorter.size)
    picked = []
    if n_none:
        rng = np.random.default_rng(seed)
        picked = np.sort(rng.choice(shorter, size=n_none, replace=False)).tolist()
    idx = sorted(reach + picked)
    return np.array(idx, dtype=np.int64), np.array([labels[i] for i in idx], dtype=np.int64)


def train_node_set(path_labels, taxonomy):
    """One row per (document, node on its path): ``(doc_indices, node_ids)``."""
    idx, nodes = [], []
    for i, p in enumerate(path_labels):
        for node in taxonomy.paths[p]:
            idx.append(i)
            nodes.append(node)
    return np.array(idx, dtype=np.int64), np.array(nodes, dtype=np.int64)


def block_layouts(taxonomy, offset=0):
    """PP, NP, then DNP_1..DNP_K layouts, in feature order."""
    blocks = [BlockLayout("pp", offset, list(range(taxonomy.n_paths)))]
    offset += taxonomy.n_paths
    blocks.append(BlockLayout("np", offset, list(range(taxonomy.n_nodes))))
    offset += taxonomy.n_nodes
    for k in range(1, taxonomy.max_depth + 1):
        labels = taxonomy.nodes_at_depth(k) + [tx.NONE]
        blocks.append(BlockLayout(f"dnp_{k}", offset, labels))
        offset += len(labels)
    return blocks


def meta_dimension(feature_dim, taxonomy):
    return feature_dim + taxonomy.n_paths + taxonomy.n_nodes + sum(
        len(taxonomy.nodes_at_depth(k)) + 1 for k in range(1, taxonomy.max_depth + 1)
    )


def _fit(X, y, n_classes, config: ForestConfig, workers, groups=None):
    if np.unique(y).size < 2:
        proba = np.bincount(y, minlength=n_classes) / y.size
        return ConstantModel(proba, X.shape[1])
    return train_forest(X, y, config, n_classes=n_classes, workers=workers, groups=groups)


class LevelOneBundle:
    def __init__(self, models, layouts, input_dim):
        self.models = models  # name -> model, same order as layouts
        self.layouts = layouts
        self.input_dim = input_dim

    @property
    def output_dim(self):
        return sum(b.size for b in self.layouts)

    def probabilities(self, X):
        """``P_PP | P_NP | P_DNP_1 | ... | P_DNP_K`` for each row of ``X``."""
        X = np.atleast_2d(X)
        if X.shape[1] != self.input_dim:
            raise ToolkitError("dimension_mismatch", f"expected {self.input_dim} features, got {X.shape[1]}")
        return np.hstack([self.models[b.name].predict_proba(X) for b in self.layouts])

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "layouts": [b.to_dict() for b in self.layouts],
            "models": {name: m.to_dict() for name, m in self.models.items()},
        }

    @classmethod
    def from_dict(cls, data):
        layouts = [BlockLayout(b["name"], b["offset"], b["labels"]) for b in data["layouts"]]
        models = {b.name: model_from_dict(data["models"][b.name]) for b in layouts}
        return cls(models, layouts, data["input_dim"])


def train_level_one(X, path_labels, taxonomy, config: EnsembleConfig, seed, workers=1):
    X = np.asarray(X, dtype=np.float64)
    path_labels = np.asarray(path_labels, dtype=np.int64)
    layouts = block_layouts(taxonomy, offset=X.shape[1])

    def forest_cfg(name):
        return ForestConfig(
            n_trees=config.level_one_trees,
            max_depth=config.max_depth,
            min_samples_leaf=config.min_samples_leaf,
            seed=derive_seed(seed, name),
        )

    models = {}
    models["pp"] = _fit(X, path_labels, taxonomy.n_paths, forest_cfg("pp"), workers)
    rows, nodes = train_node_set(path_labels, taxonomy)
    models["np"] = _fit(X[rows], nodes, taxonomy.n_nodes, forest_cfg("np"), workers, groups=rows)
    for block in layouts[2:]:
        k = int(block.name.split("_")[1])
        local = {lab: i for i, lab in enumerate(block.labels)}
        try:
            rows, labels = depth_training_set(path_labels, taxonomy, k, config.none_fraction, derive_seed(seed, "none", k))
        except ToolkitError as exc:
            if exc.code != "empty_depth":
                raise
            # nothing in this sample reaches depth k: always predict NONE
            models[block.name] = ConstantModel(np.eye(block.size)[local[tx.NONE]], X.shape[1])
            continue
        y = np.array([local[lab] for lab in labels], dtype=np.int64)
        models[block.name] = _fit(X[rows], y, block.size, forest_cfg(block.name), workers)
    return LevelOneBundle(models, layouts, X.shape[1])


def meta_features(X, bundle: LevelOneBundle):
    """Document features followed by every level-one probability block."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.hstack([X, bundle.probabilities(X)])


def fold_assignment(n, n_folds, seed):
    fold = np.empty(n, dtype=np.int64)
    order = np.random.default_rng(seed).permutation(n)
    for f in range(n_folds):
        fold[order[f::n_folds]] = f
    return fold


class EnsembleModel:
    def __init__(self, bundle, selector, final, config, n_paths):
        self.bundle = bundle
        self.selector = selector
        self.final = final
        self.config = config
        self.n_paths = n_paths

    @property
    def meta_dim(self):
        return self.bundle.input_dim + self.bundle.output_dim

    def path_proba(self, X):
        meta = meta_features(X, self.bundle)
        return self.final.predict_proba(self.selector.transform(meta))

    def to_dict(self):
        return {
            "config": asdict(self.config),
            "n_paths": self.n_paths,
            "level_one": self.bundle.to_dict(),
            "selector": self.selector.to_dict(),
            "final": self.final.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            LevelOneBundle.from_dict(data["level_one"]),
            AnovaSelector.from_dict(data["selector"]),
            model_from_dict(data["final"]),
            EnsembleConfig(**data["config"]),
            data["n_paths"],
        )


def train_ensemble(X, path_labels, taxonomy, config=None, seed=0, workers=1, return_meta=False):
    """Fit level one, build meta features, select with ANOVA F, fit FPP.

    With ``config.oof`` the meta features of training rows come from
    ``n_folds``-fold out-of-fold level-one predictions; the level-one models
    kept for prediction are refit on all rows.
    """
    config = config or EnsembleConfig()
    X = np.asarray(X, dtype=np.float64)
    path_labels = np.asarray(path_labels, dtype=np.int64)
    if X.shape[0] != path_labels.size:
        raise ToolkitError("bad_data", "features and documents are not row aligned")

    bundle = train_level_one(X, path_labels, taxonomy, config, derive_seed(seed, "level_one"), workers)
    if config.oof and config.n_folds >= 2:
        probs = np.zeros((X.shape[0], bundle.output_dim))
        folds = fold_assignment(X.shape[0], config.n_folds, derive_seed(seed, "folds"))
        for f in range(config.n_folds):
            held = folds == f
            sub = train_level_one(X[~held], path_labels[~held], taxonomy, config, derive_seed(seed, "fold", f), workers)
            probs[held] = sub.probabilities(X[held])
        meta = np.hstack([X, probs])
    else:
        meta = meta_features(X, bundle)

    expected = meta_dimension(X.shape[1], taxonomy)
    if meta.shape[1] != expected:
        raise AssertionError(f"meta layout {meta.shape[1]} != {expected}")
    m_out = config.m_out
    if m_out > meta.shape[1]:
        warnings.warn(f"m_out={m_out} exceeds meta dimension {meta.shape[1]}; keeping all features", stacklevel=2)
        m_out = meta.shape[1]
    selector = anova_select(meta, path_labels, m_out)
    final_cfg = ForestConfig(
        n_trees=config.final_trees,
        max_depth=config.max_depth,
        min_samples_leaf=config.min_samples_leaf,
        seed=derive_seed(seed, "fpp"),
    )
    final = _fit(selector.transform(meta), path_labels, taxonomy.n_paths, final_cfg, workers)
    model = EnsembleModel(bundle, selector, final, config, taxonomy.n_paths)
    return (model, meta) if return_meta else model


def top_k(proba, k_top):
    """Ranked ``[(path_id, prob), ...]``: descending probability, ascending id on ties, zeros dropped."""
    if k_top < 1:
        raise ToolkitError("bad_k", f"K_top must be >= 1, got {k_top}")
    proba = np.asarray(proba, dtype=np.float64)
    order = np.lexsort((np.arange(proba.size), -proba))
    return [(int(i), float(proba[i])) for i in order[:k_top] if proba[i] > 0]


def predict_top_k(X, model: EnsembleModel, k_top):
    """One prediction list per row of ``X``."""
    return [top_k(p, k_top) for p in model.path_proba(X)]


def predict_path_only(X, pp_model, k_top):
    """Rank paths straight from a path classifier, without the level-two stage."""
    return [top_k(p, k_top) for p in pp_model.predict_proba(np.atleast_2d(X))]
