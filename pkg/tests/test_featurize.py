import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import naive_awv, naive_bocv, naive_gwbowv

from gwbowv.corpus import Document, compute_idf
from gwbowv.embeddings import WordVectorTable
from gwbowv.errors import ToolkitError
from gwbowv.featurize import (
    ClusterModel,
    Featurizer,
    TfidfModel,
    awv,
    bocv,
    fit_tfidf,
    gwbowv,
    kmeans,
    lloyd,
    make_featurizer,
    ngrams,
    tfidf_vector,
)

# ---- the ten-word, four-cluster worked example

WORDS = [f"w{i}" for i in range(1, 11)]
CLUSTERS = {"w4": 0, "w3": 0, "w10": 0, "w5": 0, "w9": 1, "w1": 2, "w6": 2, "w2": 2, "w8": 3, "w7": 3}


@pytest.fixture
def worked():
    table = WordVectorTable(WORDS, np.array([[i, 10 + i, 100 + i] for i in range(1, 11)], dtype=float))
    idf = {f"w{i}": 1 + i / 8 for i in range(1, 11)}
    cluster = ClusterModel(np.zeros((4, 3)), dict(CLUSTERS))
    return table, cluster, idf


def test_worked_example(worked):
    table, cluster, idf = worked
    v = gwbowv(WORDS, cluster, idf, table)
    assert v.shape == (16,)
    expected = [
        22, 62, 422,   # wv4 + wv3 + wv10 + wv5
        9, 19, 109,    # wv9
        9, 39, 309,    # wv1 + wv6 + wv2
        15, 35, 215,   # wv8 + wv7
        6.75, 2.125, 4.125, 3.875,
    ]
    assert v.tolist() == expected


def test_worked_example_bocv(worked):
    _, cluster, _ = worked
    assert bocv(WORDS, cluster).tolist() == [4, 1, 3, 2]


def test_single_token_document(worked):
    table, cluster, idf = worked
    v = gwbowv(["w9"], cluster, idf, table)
    expected = np.zeros(16)
    expected[3:6] = table.get("w9")
    expected[12 + 1] = idf["w9"]
    assert np.array_equal(v, expected)


def test_oov_tokens_skipped(worked):
    table, cluster, idf = worked
    assert np.array_equal(gwbowv(["w2", "zzz"], cluster, idf, table), gwbowv(["w2"], cluster, idf, table))
    assert not gwbowv([], cluster, idf, table).any()
    assert not awv(["zzz"], table).any()


# ---- brute-force oracles

def random_setup(rng, n_words=20, K=3, d=4):
    words = [f"t{i}" for i in range(n_words)]
    table = WordVectorTable(words, rng.normal(size=(n_words, d)))
    cluster = kmeans(table, K, seed=int(rng.integers(1000)))
    return words, table, cluster


def test_random_documents_match_oracles(rng):
    words, table, cluster = random_setup(rng)
    docs = [list(rng.choice(words + ["oov"], size=30)) for _ in range(50)]
    _, idf = compute_idf(docs)
    for doc in docs:
        np.testing.assert_allclose(gwbowv(doc, cluster, idf, table), naive_gwbowv(doc, cluster.assignment, 3, idf, table), atol=1e-9, rtol=0)
        np.testing.assert_allclose(awv(doc, table), naive_awv(doc, table), atol=1e-9, rtol=0)
        np.testing.assert_allclose(bocv(doc, cluster), naive_bocv(doc, cluster.assignment, 3), atol=1e-9, rtol=0)


def test_awv_fixtures():
    t = WordVectorTable(["p", "n", "q"], np.array([[1.0, -2.0], [-1.0, 2.0], [3.0, 4.0]]))
    assert awv(["q"], t).tolist() == [3.0, 4.0]
    assert awv(["p", "n"], t).tolist() == [0.0, 0.0]


def test_bocv_counts_in_vocab_tokens(rng):
    words, _, cluster = random_setup(rng)
    doc = list(rng.choice(words + ["oov1", "oov2"], size=40))
    assert bocv(doc, cluster).sum() == sum(w in cluster.assignment for w in doc)
    assert not bocv([], cluster).any()


# ---- composition properties

def _doc_strategy(words):
    return st.lists(st.sampled_from(words), max_size=25)


_PROP_RNG = np.random.default_rng(7)
_P_WORDS, _P_TABLE, _P_CLUSTER = random_setup(_PROP_RNG, n_words=15, K=4, d=3)
_P_IDF = {w: 0.5 + i / 10 for i, w in enumerate(_P_WORDS)}


@given(_doc_strategy(_P_WORDS), _doc_strategy(_P_WORDS))
def test_linearity(a, b):
    f = lambda doc: gwbowv(doc, _P_CLUSTER, _P_IDF, _P_TABLE)  # noqa: E731
    np.testing.assert_allclose(f(a + b), f(a) + f(b), atol=1e-9)


@given(_doc_strategy(_P_WORDS), st.randoms(use_true_random=False))
def test_permutation_invariance(doc, r):
    shuffled = list(doc)
    r.shuffle(shuffled)
    np.testing.assert_allclose(gwbowv(shuffled, _P_CLUSTER, _P_IDF, _P_TABLE), gwbowv(doc, _P_CLUSTER, _P_IDF, _P_TABLE), atol=1e-9)
    np.testing.assert_allclose(awv(shuffled, _P_TABLE), awv(doc, _P_TABLE), atol=1e-12)
    assert np.array_equal(bocv(shuffled, _P_CLUSTER), bocv(doc, _P_CLUSTER))


@given(_doc_strategy(_P_WORDS))
def test_icf_with_unit_idf_is_bocv(doc):
    K, d = _P_CLUSTER.n_clusters, _P_TABLE.dim
    ones = {w: 1.0 for w in _P_WORDS}
    v = gwbowv(doc, _P_CLUSTER, ones, _P_TABLE)
    assert np.array_equal(v[K * d:], bocv(doc, _P_CLUSTER))


@given(_doc_strategy(_P_WORDS))
def test_dimension_law_and_icf_support(doc):
    K, d = _P_CLUSTER.n_clusters, _P_TABLE.dim
    v = gwbowv(doc, _P_CLUSTER, _P_IDF, _P_TABLE)
    assert v.shape == (K * d + K,)
    icf = v[K * d:]
    assert (icf >= 0).all()
    for k in range(K):
        # with positive idf, icf_k = 0 exactly when no token fell in cluster k
        hit = any(_P_CLUSTER.assignment[w] == k for w in doc)
        assert (icf[k] > 0) == hit


# ---- k-means

def test_kmeans_separates_two_groups(rng):
    X = np.vstack([rng.normal(0, 0.01, (10, 2)), rng.normal(5, 0.01, (10, 2))])
    _, labels, _ = lloyd(X, 2, seed=3)
    assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1
    assert labels[0] != labels[10]


def test_kmeans_single_cluster_is_mean(rng):
    X = rng.normal(size=(30, 4))
    C, labels, _ = lloyd(X, 1)
    np.testing.assert_allclose(C[0], X.mean(0), atol=1e-12)
    assert not labels.any()


@pytest.mark.parametrize("seed", range(5))
def test_sse_non_increasing_and_centroids_are_means(rng, seed):
    X = rng.normal(size=(80, 3))
    C, labels, history = lloyd(X, 6, seed=seed)
    assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
    for j in range(6):
        np.testing.assert_allclose(C[j], X[labels == j].mean(0), atol=1e-9)


def test_kmeans_repairs_empty_clusters():
    X = np.array([[0.0, 0.0]] * 4 + [[1.0, 1.0]])
    C, labels, _ = lloyd(X, 3, seed=0)
    assert set(labels.tolist()) == {0, 1, 2}


def test_kmeans_every_word_assigned(rng):
    words, table, cluster = random_setup(rng, n_words=25, K=5)
    assert set(cluster.assignment) == set(words)
    assert set(cluster.assignment.values()) <= set(range(5))


def test_kmeans_bad_k(rng):
    with pytest.raises(ToolkitError):
        lloyd(rng.normal(size=(3, 2)), 4)
    with pytest.raises(ToolkitError):
        lloyd(rng.normal(size=(3, 2)), 0)


def test_kmeans_deterministic(rng):
    X = rng.normal(size=(50, 3))
    a, b = lloyd(X, 4, seed=11), lloyd(X, 4, seed=11)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


# ---- tf-idf

def test_tfidf_repeated_token():
    model = TfidfModel({"disk": 0}, {"disk": 1.5})
    assert tfidf_vector(["disk", "case", "disk"], model) == {0: 3.0}
    assert tfidf_vector(["case"], model) == {}


def test_bigrams_only_when_adjacent():
    assert "hard disk" in ngrams(["hard", "disk", "case"])
    assert "hard case" not in ngrams(["hard", "disk", "case"])
    model = TfidfModel({"hard disk": 0}, {"hard disk": 2.0})
    assert tfidf_vector(["hard", "disk"], model) == {0: 2.0}
    assert tfidf_vector(["disk", "hard"], model) == {}


def test_fit_tfidf_top_m():
    docs = [["a", "b"], ["a", "c"], ["a", "b"]]
    model = fit_tfidf(docs, 3)
    # frequency: a=3, b=2, "a b"=2, then ties alphabetical
    assert list(model.features) == ["a", "a b", "b"]
    assert all(0 <= j < 3 for j in model.features.values())
    with pytest.raises(ToolkitError):
        fit_tfidf(docs, 100)


# ---- featurizer

def _docs(rng, words, n=20):
    return [Document(f"d{i}", tuple(rng.choice(words, size=12)), 0) for i in range(n)]


@pytest.mark.parametrize("mode", ["gwbowv", "awv", "bocv", "tfidf"])
def test_featurizer_round_trip(rng, mode):
    words, table, _ = random_setup(rng, n_words=12, K=3, d=4)
    docs = _docs(rng, words)
    fz = make_featurizer(mode, docs, table, n_clusters=3, seed=1, tfidf_dim=10)
    X, degenerate = fz.transform(docs)
    assert X.shape == (20, fz.dim) and degenerate == []
    back = Featurizer.from_dict(json.loads(json.dumps(fz.to_dict())))
    assert np.array_equal(back.transform(docs)[0], X)


def test_featurizer_layout_and_degenerate_rows(rng):
    words, table, _ = random_setup(rng, n_words=12, K=3, d=4)
    fz = make_featurizer("gwbowv", _docs(rng, words), table, n_clusters=3)
    assert fz.dim == 15
    assert fz.layout() == {"cv": [0, 12], "icf": [12, 15], "K": 3, "d": 4}
    _, degenerate = fz.transform([("unknown",), tuple(words[:2])])
    assert degenerate == [0]


def test_featurizer_normalize(rng):
    words, table, _ = random_setup(rng, n_words=12, K=3, d=4)
    fz = make_featurizer("gwbowv", _docs(rng, words), table, n_clusters=3, normalize=True)
    X, _ = fz.transform([tuple(words)])
    assert np.linalg.norm(X[0]) == pytest.approx(1.0)


def test_featurizer_needs_vectors(rng):
    with pytest.raises(ToolkitError):
        make_featurizer("gwbowv", [("a",)], None, n_clusters=1)
    with pytest.raises(ToolkitError):
        make_featurizer("nope", [("a",)])
