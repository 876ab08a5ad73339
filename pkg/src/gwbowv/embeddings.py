"""Word vectors: skip-gram with negative sampling, plus word2vec text I/O."""

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gwbowv.errors import ToolkitError
from gwbowv.fileio import atomic_write_text

log = logging.getLogger(__name__)


@dataclass
class WordVectorTable:
    words: list[str]
    vectors: np.ndarray  # (|V|, d)
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise ToolkitError("bad_vectors", f"{len(self.words)} words but vectors of shape {self.vectors.shape}")
        if not np.all(np.isfinite(self.vectors)):
            raise ToolkitError("bad_vectors", "non-finite vector component")
        self._index = {}
        for i, w in enumerate(self.words):
            if w in self._index:
                raise ToolkitError("duplicate_word", w)
            self._index[w] = i

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def index(self, word):
        return self._index[word]

    def get(self, word):
        return self.vectors[self._index[word]]


@dataclass
class SgnsConfig:
    dim: int = 200
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_count: int = 5
    noise_exponent: float = 0.75
    batch_size: int = 256
    seed: int = 0

    def validate(self):
        for name in ("dim", "window", "negatives", "epochs", "min_count", "batch_size"):
            if getattr(self, name) < 1:
                raise ToolkitError("bad_config", f"sgns.{name} must be positive")
        if not 0 < self.noise_exponent <= 1:
            raise ToolkitError("bad_config", "sgns.noise_exponent must lie in (0, 1]")
        if self.learning_rate <= 0:
            raise ToolkitError("bad_config", "sgns.learning_rate must be positive")


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def sgns_loss(center, context, negatives):
    """Negative-sampling loss for one (center, context, negatives) triple.

    ``center`` and ``context`` are d-vectors (input and output side),
    ``negatives`` is (k, d). Returns ``-log s(u_o.v) - sum log s(-u_k.v)``.
    """
    return float(-_log_sigmoid(context @ center) - _log_sigmoid(-(negatives @ center)).sum())


def sgns_grads(center, context, negatives):
    """Analytic gradients of :func:`sgns_loss` w.r.t. center, context and each negative."""
    g_pos = _sigmoid(context @ center) - 1.0
    g_neg = _sigmoid(negatives @ center)
    d_center = g_pos * context + g_neg @ negatives
    d_context = g_pos * center
    d_negatives = g_neg[:, None] * center[None, :]
    return d_center, d_context, d_negatives


def build_vocab(documents, min_count):
    """Words kept after the min-count filter, ordered by count desc then alphabetically."""
    counts = Counter()
    for doc in documents:
        counts.update(doc.tokens if hasattr(doc, "tokens") else doc)
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return [w for w, _ in kept], np.array([c for _, c in kept], dtype=np.float64)


def _pairs(sentences, window):
    centers, contexts = [], []
    for sent in sentences:
        n = len(sent)
        if n < 2:
            continue
        arr = np.asarray(sent, dtype=np.int64)
        for off in range(1, window + 1):
            if off >= n:
                break
            centers.append(arr[:-off])
            contexts.append(arr[off:])
            centers.append(arr[off:])
            contexts.append(arr[:-off])
    if not centers:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


class SgnsTrainer:
    """Mini-batch SGD on the SGNS objective.

    Gradients from a batch are applied together, so a word occurring several
    times in one batch receives the sum of its updates. With a fixed seed the
    result is fully deterministic.
    """

    def __init__(self, config: SgnsConfig):
        config.validate()
        self.config = config
        self.epoch_losses: list[float] = []

    def fit(self, documents):
        cfg = self.config
        words, counts = build_vocab(documents, cfg.min_count)
        if len(words) < 2:
            raise ToolkitError("vocabulary_too_small", f"{len(words)} word(s) survive min_count={cfg.min_count}")
        index = {w: i for i, w in enumerate(words)}
        sentences = []
        for doc in documents:
            tokens = doc.tokens if hasattr(doc, "tokens") else doc
            sentences.append([index[t] for t in tokens if t in index])
        centers, contexts = _pairs(sentences, cfg.window)
        if centers.size == 0:
            raise ToolkitError("vocabulary_too_small", "no (center, context) pairs in corpus")

        rng = np.random.default_rng(cfg.seed)
        V, d = len(words), cfg.dim
        self.w_in = (rng.random((V, d)) - 0.5) / d
        self.w_out = np.zeros((V, d))
        noise = counts ** cfg.noise_exponent
        self.noise_cdf = np.cumsum(noise / noise.sum())
        self.noise_cdf[-1] = 1.0

        n_pairs = centers.size
        total_steps = cfg.epochs * n_pairs
        done = 0
        self.epoch_losses = []
        for epoch in range(cfg.epochs):
            order = rng.permutation(n_pairs)
            loss_sum = 0.0
            for start in range(0, n_pairs, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                lr = cfg.learning_rate * max(1e-4, 1.0 - done / total_steps)
                negs = np.searchsorted(self.noise_cdf, rng.random((idx.size, cfg.negatives)), side="right")
                negs = np.minimum(negs, V - 1)
                loss_sum += self._step(centers[idx], contexts[idx], negs, lr)
                done += idx.size
            self.epoch_losses.append(loss_sum / n_pairs)
            log.debug("sgns epoch %d mean loss %.5f", epoch + 1, self.epoch_losses[-1])
        return WordVectorTable(words, self.w_in.copy())

    def _step(self, c, o, negs, lr):
        v = self.w_in[c]                       # (B, d)
        u_pos = self.w_out[o]                  # (B, d)
        u_neg = self.w_out[negs]               # (B, k, d)
        s_pos = np.einsum("bd,bd->b", v, u_pos)
        s_neg = np.einsum("bkd,bd->bk", u_neg, v)
        loss = -_log_sigmoid(s_pos).sum() - _log_sigmoid(-s_neg).sum()
        g_pos = _sigmoid(s_pos) - 1.0          # (B,)
        g_neg = _sigmoid(s_neg)                # (B, k)
        d_v = g_pos[:, None] * u_pos + np.einsum("bk,bkd->bd", g_neg, u_neg)
        d_pos = g_pos[:, None] * v
        d_neg = g_neg[:, :, None] * v[:, None, :]
        np.add.at(self.w_in, c, -lr * d_v)
        np.add.at(self.w_out, o, -lr * d_pos)
        np.add.at(self.w_out, negs.ravel(), -lr * d_neg.reshape(-1, v.shape[1]))
        return float(loss)


def train_sgns(documents, config=None):
    """Train word vectors; returns the input-side (center) vectors."""
    return SgnsTrainer(config or SgnsConfig()).fit(documents)


def save_vectors(path, table: WordVectorTable):
    lines = [f"{len(table)} {table.dim}"]
    for word, vec in zip(table.words, table.vectors):
        lines.append(word + " " + " ".join(f"{x:.6g}" for x in vec))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_vectors(path):
    path = Path(path)
    if not path.exists():
        raise ToolkitError("file_not_found", str(path))
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or not all(h.isdigit() for h in header):
            raise ToolkitError("parse_error", f"{path}:1: header must be '<vocab_count> <dim>'")
        count, dim = int(header[0]), int(header[1])
        words = []
        rows = np.empty((count, dim))
        seen = set()
        lineno = 1
        for line in fh:
            lineno += 1
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            if len(words) >= count:
                raise ToolkitError("parse_error", f"{path}:{lineno}: more than {count} vectors")
            if len(parts) != dim + 1:
                raise ToolkitError("parse_error", f"{path}:{lineno}: expected {dim} components, got {len(parts) - 1}")
            word = parts[0]
            if word in seen:
                raise ToolkitError("duplicate_word", f"{path}:{lineno}: {word}")
            try:
                rows[len(words)] = [float(x) for x in parts[1:]]
            except ValueError:
                raise ToolkitError("parse_error", f"{path}:{lineno}: non-numeric component") from None
            seen.add(word)
            words.append(word)
        if len(words) != count:
            raise ToolkitError("parse_error", f"{path}:{lineno}: header declares {count} vectors, found {len(words)}")
    return WordVectorTable(words, rows)


def cosine(w1, w2, table: WordVectorTable):
    for w in (w1, w2):
        if w not in table:
            raise ToolkitError("missing_word", w)
    a, b = table.get(w1), table.get(w2)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ToolkitError("zero_vector", f"{w1 if na == 0 else w2} has a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))
