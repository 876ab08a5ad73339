"""In-memory versions of the CLI stages, for experiments and the acceptance suite.

Seeds are derived from the run config under the same component names the
CLI uses, so a run here and ``gwbowv pipeline`` see the same corpus and the
same word vectors.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from gwbowv import corpus, embeddings, ensemble, featurize, metrics, syngen
from gwbowv.config import RunConfig
from gwbowv.learners import ForestConfig, train_forest


@dataclass
class SyntheticSplit:
    taxonomy: object
    train: list  # Documents
    test: list

    @property
    def y_train(self):
        return np.array([d.path_label for d in self.train], dtype=np.int64)

    @property
    def y_test(self):
        return np.array([d.path_label for d in self.test], dtype=np.int64)


@dataclass
class Timer:
    laps: dict = field(default_factory=dict)

    def __post_init__(self):
        self._t = time.perf_counter()

    def lap(self, name):
        now = time.perf_counter()
        self.laps[name] = now - self._t
        self._t = now

    @property
    def total(self):
        return sum(self.laps.values())


def synthetic_split(cfg: RunConfig, synth=None):
    """Generate, split and ingest a synthetic corpus."""
    synth = replace(synth or cfg.synth, seed=cfg.seed_for("synth"))
    records, taxonomy = syngen.generate(synth)
    train, test = syngen.split_records(records, cfg.test_fraction, cfg.seed_for("split"))
    opts = dict(title_weight=cfg.title_weight, reject_labels=cfg.reject_labels,
                stop_words=cfg.stop_words, min_length=cfg.min_token_length)
    return SyntheticSplit(
        taxonomy,
        corpus.ingest(train, taxonomy, **opts).documents,
        corpus.ingest(test, taxonomy, **opts).documents,
    )


def word_vectors(split: SyntheticSplit, cfg: RunConfig):
    trainer = embeddings.SgnsTrainer(replace(cfg.sgns, seed=cfg.seed_for("sgns")))
    table = trainer.fit(split.train)
    return table, trainer.epoch_losses


def features(mode, split: SyntheticSplit, table, cfg: RunConfig):
    """``(X_train, X_test, featurizer)`` with corpus statistics fitted on the training part."""
    fz = featurize.make_featurizer(
        mode, split.train, table, n_clusters=cfg.n_clusters, seed=cfg.seed_for("kmeans"),
        max_iters=cfg.kmeans_max_iters, tfidf_dim=cfg.tfidf_dim, normalize=cfg.normalize,
    )
    return fz.transform(split.train)[0], fz.transform(split.test)[0], fz


def path_forest(X, y, n_paths, cfg: RunConfig, n_trees=None):
    """Stand-alone path classifier (forest over PathIds)."""
    fc = ForestConfig(n_trees=n_trees or cfg.ensemble.level_one_trees, max_depth=cfg.ensemble.max_depth,
                      min_samples_leaf=cfg.ensemble.min_samples_leaf, seed=cfg.seed_for("path_forest"))
    return train_forest(X, y, fc, n_classes=n_paths, workers=cfg.workers)


def score(ranked, y_true, taxonomy, ks=(1, 3, 6)):
    """``{k: EvalResult}`` for prediction lists aligned with ``y_true``."""
    cases = [metrics.EvalCase(int(t), tuple(p)) for t, p in zip(y_true, ranked)]
    return {r.k: r for r in metrics.evaluate(cases, taxonomy, ks)}


def train_ensemble(X, split: SyntheticSplit, cfg: RunConfig, return_meta=False):
    return ensemble.train_ensemble(
        X, split.y_train, split.taxonomy, cfg.ensemble, seed=cfg.seed_for("ensemble"),
        workers=cfg.workers, return_meta=return_meta,
    )
