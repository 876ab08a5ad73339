"""Seeded synthetic hierarchical corpora with heavy-tailed leaf sizes.

Every node owns a small topic vocabulary. A document draws each token either
from the vocabulary of a node on its path (with probability
``topic_fraction``) or from a shared noise vocabulary; its title samples the
leaf vocabulary only.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from gwbowv import taxonomy as tx
from gwbowv.corpus import RawRecord
from gwbowv.errors import ToolkitError


@dataclass
class SynthConfig:
    branching: list[int] = field(default_factory=lambda: [4, 3, 2])
    words_per_node: int = 20
    noise_vocab: int = 200
    tokens_per_doc: tuple[int, int] = (12, 20)
    title_tokens: tuple[int, int] = (2, 4)
    docs_per_leaf: int = 480
    skew: float = 0.5
    topic_fraction: float = 0.7
    seed: int = 0
    # (leaf_a, leaf_b, overlap) triples; leaf indices follow depth-first order
    confusions: list = field(default_factory=list)

    def validate(self):
        if not self.branching or any(b < 1 for b in self.branching):
            raise ToolkitError("bad_config", "synth.branching must be a non-empty list of positive ints")
        for name in ("words_per_node", "noise_vocab", "docs_per_leaf"):
            if getattr(self, name) < 1:
                raise ToolkitError("bad_config", f"synth.{name} must be positive")
        lo, hi = self.tokens_per_doc
        tlo, thi = self.title_tokens
        if not (1 <= lo <= hi and 0 <= tlo <= thi):
            raise ToolkitError("bad_config", "synth token ranges must be ordered and positive")
        if not 0 < self.topic_fraction <= 1:
            raise ToolkitError("bad_config", "synth.topic_fraction must lie in (0, 1]")
        if self.skew < 0:
            raise ToolkitError("bad_config", "synth.skew must be >= 0")

    @property
    def n_leaves(self):
        return math.prod(self.branching)


def leaf_counts(n_leaves, base, skew):
    """``ceil(base / rank**skew)`` for ranks 1..n_leaves."""
    return [math.ceil(base / r ** skew) for r in range(1, n_leaves + 1)]


def leaf_paths(branching):
    """All root-to-leaf name lists in depth-first order.

    Sibling names repeat across parents (``cat0`` exists under every parent),
    so only the full chain identifies a node.
    """
    paths = [[]]
    for width in branching:
        paths = [p + [f"cat{i}"] for p in paths for i in range(width)]
    return paths


def plant_confusion(config: SynthConfig, leaves, overlap):
    """Copy of ``config`` where the two leaves share ``overlap`` of their topic vocabulary."""
    a, b = leaves
    if a == b:
        raise ToolkitError("same_leaf", "plant_confusion needs two distinct leaves")
    n = config.n_leaves
    if not (0 <= a < n and 0 <= b < n):
        raise ToolkitError("bad_leaf", f"leaf indices must lie in 0..{n - 1}")
    if not 0 <= overlap <= 1:
        raise ToolkitError("bad_config", "overlap must lie in [0, 1]")
    return replace(config, confusions=list(config.confusions) + [(int(a), int(b), float(overlap))])


def vocabularies(config: SynthConfig, taxonomy):
    """Topic words per NodeId, with planted overlaps applied."""
    vocab = {
        node.id: [f"n{node.id}w{j}" for j in range(config.words_per_node)] for node in taxonomy.nodes
    }
    leaf_nodes = [p[-1] for p in taxonomy.paths]
    for a, b, overlap in config.confusions:
        va, vb = vocab[leaf_nodes[a]], vocab[leaf_nodes[b]]
        shared = int(round(overlap * config.words_per_node))
        vocab[leaf_nodes[b]] = va[:shared] + vb[shared:]
    return vocab


def generate(config: SynthConfig):
    """Records (shuffled) and the taxonomy they were drawn from."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    taxonomy = tx.build(leaf_paths(config.branching))
    vocab = vocabularies(config, taxonomy)
    noise = [f"z{j}" for j in range(config.noise_vocab)]
    counts = leaf_counts(taxonomy.n_paths, config.docs_per_leaf, config.skew)
    rank_of = rng.permutation(taxonomy.n_paths)  # leaf -> rank - 1

    records = []
    for pid in range(taxonomy.n_paths):
        nodes = taxonomy.paths[pid]
        names = taxonomy.path_names(pid)
        leaf_vocab = vocab[nodes[-1]]
        for _ in range(counts[rank_of[pid]]):
            n_tok = int(rng.integers(config.tokens_per_doc[0], config.tokens_per_doc[1] + 1))
            words = []
            for is_topic in rng.random(n_tok) < config.topic_fraction:
                if is_topic:
                    v = vocab[nodes[int(rng.integers(len(nodes)))]]
                    words.append(v[int(rng.integers(len(v)))])
                else:
                    words.append(noise[int(rng.integers(len(noise)))])
            n_title = int(rng.integers(config.title_tokens[0], config.title_tokens[1] + 1))
            title = [leaf_vocab[int(rng.integers(len(leaf_vocab)))] for _ in range(n_title)]
            records.append((pid, " ".join(title), " ".join(words), names))
    order = rng.permutation(len(records))
    out = []
    for i, j in enumerate(order):
        _, title, desc, names = records[j]
        out.append(RawRecord(f"doc{i:06d}", title, desc, tuple(names)))
    return out, taxonomy


def split_records(records, test_fraction, seed):
    """Stratified train/test split by path; each path with >= 2 records lands in both parts."""
    if not 0 < test_fraction < 1:
        raise ToolkitError("bad_config", "test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    by_path = {}
    for i, r in enumerate(records):
        by_path.setdefault(tuple(r.path), []).append(i)
    test = set()
    for key in sorted(by_path):
        idx = by_path[key]
        n_test = int(round(test_fraction * len(idx)))
        if len(idx) >= 2:
            n_test = min(max(n_test, 1), len(idx) - 1)
        test.update(rng.choice(idx, size=n_test, replace=False).tolist())
    train = [r for i, r in enumerate(records) if i not in test]
    return train, [r for i, r in enumerate(records) if i in test]
