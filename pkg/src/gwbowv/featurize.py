"""Semantic word clusters and document vector composition.

gwBoWV lays a document out as ``cv_1 .. cv_K`` (per-cluster sums of word
vectors) followed by ``icf_1 .. icf_K`` (per-cluster sums of idf), giving
``K*d + K`` dimensions. AWV, BoCV and tf-idf are the comparison baselines.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from gwbowv.corpus import compute_idf
from gwbowv.embeddings import WordVectorTable
from gwbowv.errors import ToolkitError

log = logging.getLogger(__name__)

MODES = ("gwbowv", "awv", "bocv", "tfidf")


@dataclass
class ClusterModel:
    centroids: np.ndarray  # (K, d)
    assignment: dict[str, int]
    sse_history: list[float] = field(default_factory=list)
    n_iter: int = 0

    @property
    def n_clusters(self):
        return self.centroids.shape[0]

    @property
    def dim(self):
        return self.centroids.shape[1]


def _sq_dists(X, C):
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_pp_init(X, k, rng):
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    closest = ((X - X[centers[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every point coincides with a chosen center; pick an unused row
            unused = np.setdiff1d(np.arange(n), centers)
            nxt = int(unused[rng.integers(unused.size)])
        else:
            nxt = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        centers.append(nxt)
        closest = np.minimum(closest, ((X - X[nxt]) ** 2).sum(1))
    return X[centers].copy()


def lloyd(X, k, seed=0, max_iters=100):
    """Lloyd's algorithm from k-means++ seeds.

    Returns ``(centroids, labels, sse_history)``; the history holds the
    within-cluster SSE after each iteration's assignment step.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ToolkitError("bad_k", f"K={k} must lie in 1..{n}")
    rng = np.random.default_rng(seed)
    C = kmeans_pp_init(X, k, rng)
    labels = None
    history = []
    for _ in range(max_iters):
        d = _sq_dists(X, C)
        new = d.argmin(1)
        # repair empty clusters from the points farthest from their centroid
        counts = np.bincount(new, minlength=k)
        if np.any(counts == 0):
            own = d[np.arange(n), new]
            taken = set()
            for j in np.flatnonzero(counts == 0):
                for cand in np.argsort(-own, kind="stable"):
                    if cand not in taken and counts[new[cand]] > 1:
                        break
                taken.add(int(cand))
                counts[new[cand]] -= 1
                new[cand] = j
                counts[j] = 1
                C[j] = X[cand]
                own[cand] = 0.0
        history.append(float(((X - C[new]) ** 2).sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            C[j] = X[labels == j].mean(0)
    else:
        # centroids moved on the last pass; refresh assignment to match them
        labels = _sq_dists(X, C).argmin(1)
        history.append(float(((X - C[labels]) ** 2).sum()))
    return C, labels, history


def kmeans(table: WordVectorTable, k, seed=0, max_iters=100):
    C, labels, history = lloyd(table.vectors, k, seed, max_iters)
    model = ClusterModel(C, {w: int(l) for w, l in zip(table.words, labels)}, history, len(history))
    return model


def gwbowv(tokens, cluster: ClusterModel, idf, table: WordVectorTable):
    """Compose one gwBoWV vector. Tokens missing from the table, clusters or idf are skipped."""
    K, d = cluster.n_clusters, table.dim
    cv = np.zeros((K, d))
    icf = np.zeros(K)
    for w in tokens:
        k = cluster.assignment.get(w)
        if k is None or w not in table or w not in idf:
            continue
        cv[k] += table.get(w)
        icf[k] += idf[w]
    return np.concatenate([cv.ravel(), icf])


def awv(tokens, table: WordVectorTable):
    vecs = [table.get(w) for w in tokens if w in table]
    if not vecs:
        return np.zeros(table.dim)
    return np.mean(vecs, axis=0)


def bocv(tokens, cluster: ClusterModel):
    out = np.zeros(cluster.n_clusters)
    for w in tokens:
        k = cluster.assignment.get(w)
        if k is not None:
            out[k] += 1
    return out


def ngrams(tokens, max_n=2):
    """Unigrams then space-joined n-grams up to ``max_n`` over adjacent tokens."""
    out = list(tokens)
    for n in range(2, max_n + 1):
        out.extend(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return out


@dataclass
class TfidfModel:
    features: dict[str, int]  # n-gram -> column
    idf: dict[str, float]
    max_n: int = 2

    @property
    def dim(self):
        return len(self.features)


def fit_tfidf(documents, m, max_n=2):
    """Keep the ``m`` most frequent uni/bi-grams (count desc, then lexicographic)."""
    grams = [ngrams(list(_tokens(doc)), max_n) for doc in documents]
    freq = Counter()
    for g in grams:
        freq.update(g)
    if not 1 <= m <= len(freq):
        raise ToolkitError("bad_m", f"m={m} must lie in 1..{len(freq)}")
    top = sorted(freq, key=lambda g: (-freq[g], g))[:m]
    _, idf = compute_idf(grams)
    return TfidfModel({g: i for i, g in enumerate(top)}, {g: idf[g] for g in top}, max_n)


def tfidf_vector(tokens, model: TfidfModel):
    """Sparse ``{column: tf * idf}`` over the selected n-grams."""
    counts = Counter(g for g in ngrams(list(tokens), model.max_n) if g in model.features)
    return {model.features[g]: c * model.idf[g] for g, c in sorted(counts.items(), key=lambda gc: model.features[gc[0]])}


def _tokens(doc):
    return doc.tokens if hasattr(doc, "tokens") else doc


@dataclass
class Featurizer:
    """Everything needed to turn token lists into feature rows for one mode."""

    mode: str
    table: WordVectorTable | None = None
    cluster: ClusterModel | None = None
    idf: dict | None = None
    tfidf: TfidfModel | None = None
    normalize: bool = False

    @property
    def dim(self):
        if self.mode == "gwbowv":
            return self.cluster.n_clusters * self.table.dim + self.cluster.n_clusters
        if self.mode == "awv":
            return self.table.dim
        if self.mode == "bocv":
            return self.cluster.n_clusters
        return self.tfidf.dim

    def layout(self):
        if self.mode == "gwbowv":
            K, d = self.cluster.n_clusters, self.table.dim
            return {"cv": [0, K * d], "icf": [K * d, K * d + K], "K": K, "d": d}
        return {"dense": [0, self.dim]}

    def transform_one(self, tokens):
        if self.mode == "gwbowv":
            row = gwbowv(tokens, self.cluster, self.idf, self.table)
        elif self.mode == "awv":
            row = awv(tokens, self.table)
        elif self.mode == "bocv":
            row = bocv(tokens, self.cluster)
        elif self.mode == "tfidf":
            row = np.zeros(self.tfidf.dim)
            for j, v in tfidf_vector(tokens, self.tfidf).items():
                row[j] = v
        else:
            raise ToolkitError("bad_mode", self.mode)
        if self.normalize:
            norm = np.linalg.norm(row)
            if norm > 0:
                row = row / norm
        return row

    def transform(self, documents):
        """Feature matrix plus the indices of degenerate (all-zero) rows."""
        X = np.zeros((len(documents), self.dim))
        for i, doc in enumerate(documents):
            X[i] = self.transform_one(_tokens(doc))
        degenerate = np.flatnonzero(~X.any(axis=1)).tolist()
        if degenerate:
            log.info("%d document(s) produced all-zero %s vectors", len(degenerate), self.mode)
        return X, degenerate

    def to_dict(self):
        out = {"format_version": 1, "mode": self.mode, "normalize": self.normalize}
        if self.table is not None:
            out["vectors"] = {"words": self.table.words, "values": self.table.vectors.tolist()}
        if self.cluster is not None:
            out["clusters"] = {
                "centroids": self.cluster.centroids.tolist(),
                "assignment": self.cluster.assignment,
            }
        if self.idf is not None:
            out["idf"] = self.idf
        if self.tfidf is not None:
            out["tfidf"] = {"features": self.tfidf.features, "idf": self.tfidf.idf, "max_n": self.tfidf.max_n}
        return out

    @classmethod
    def from_dict(cls, data):
        if data.get("mode") not in MODES:
            raise ToolkitError("bad_featurizer", f"unknown mode {data.get('mode')!r}")
        table = cluster = tfidf = None
        if "vectors" in data:
            table = WordVectorTable(data["vectors"]["words"], np.array(data["vectors"]["values"]))
        if "clusters" in data:
            cluster = ClusterModel(np.array(data["clusters"]["centroids"]), dict(data["clusters"]["assignment"]))
        if "tfidf" in data:
            t = data["tfidf"]
            tfidf = TfidfModel(dict(t["features"]), dict(t["idf"]), t["max_n"])
        return cls(data["mode"], table, cluster, data.get("idf"), tfidf, data.get("normalize", False))


def make_featurizer(mode, documents, table=None, n_clusters=None, seed=0, max_iters=100, tfidf_dim=None, normalize=False):
    """Fit the corpus-level state (idf, clusters, n-gram set) a mode needs."""
    if mode not in MODES:
        raise ToolkitError("bad_mode", f"mode must be one of {MODES}")
    if mode == "tfidf":
        return Featurizer(mode, tfidf=fit_tfidf(documents, tfidf_dim), normalize=normalize)
    if table is None:
        raise ToolkitError("missing_vectors", f"mode {mode} needs word vectors")
    if mode == "awv":
        return Featurizer(mode, table=table, normalize=normalize)
    cluster = kmeans(table, n_clusters, seed=seed, max_iters=max_iters)
    idf = None
    if mode == "gwbowv":
        _, idf = compute_idf(documents)
    return Featurizer(mode, table=table, cluster=cluster, idf=idf, normalize=normalize)
