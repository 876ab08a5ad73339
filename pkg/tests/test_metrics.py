import numpy as np
import pytest
from helpers import oracle_metrics, random_cases, random_tree
from hypothesis import given
from hypothesis import strategies as st

from gwbowv import taxonomy as tx
from gwbowv.errors import ToolkitError
from gwbowv.metrics import (
    EvalCase,
    cp_at_k,
    evaluate,
    lc_at_k,
    lr_at_k,
    pp_at_k,
    results_csv,
    results_table,
    truncate,
)


@pytest.fixture
def tree():
    return tx.build([["a", "b", "c"], ["a", "b", "d"], ["a", "e"], ["f", "g", "h"]])


def case(truth, *probs):
    return EvalCase(truth, tuple(enumerate(probs)))


def test_pp_fixtures(tree):
    assert pp_at_k(case(1, 0.5, 0.3, 0.2), tree) == pytest.approx(0.3)
    assert pp_at_k(case(0, 0.2, 0.2, 0.1), tree) == pytest.approx(0.4)
    assert pp_at_k(EvalCase(3, ((0, 0.5), (1, 0.5))), tree) == 0.0
    assert pp_at_k(EvalCase(0, ((0, 0.0),)), tree) == 0.0


def test_cp_fixtures(tree):
    assert cp_at_k(EvalCase(2, ((0, 0.3), (1, 0.2), (2, 0.1)))) == 1.0
    assert cp_at_k(EvalCase(3, ((0, 0.3),))) == 0.0


def test_lr_fixtures(tree):
    c = tree.path_id(["a", "b", "c"])
    d = tree.path_id(["a", "b", "d"])
    h = tree.path_id(["f", "g", "h"])
    assert lr_at_k(EvalCase(c, ((d, 1.0),)), tree) == pytest.approx(2 / 3)
    assert lr_at_k(EvalCase(c, ((d, 0.6), (c, 0.4))), tree) == 1.0
    assert lr_at_k(EvalCase(c, ((h, 1.0),)), tree) == 0.0


def test_lc_fixtures(tree):
    c = tree.path_id(["a", "b", "c"])
    e = tree.path_id(["a", "e"])
    assert lc_at_k(EvalCase(c, ((e, 1.0),)), tree) == 1.0
    # {a,b,c} and {a,e}: one shared of four distinct nodes
    assert lc_at_k(EvalCase(c, ((c, 0.5), (e, 0.5))), tree) == pytest.approx(1 / 4)
    ab = tx.build([["a", "b"], ["a", "c"]])
    assert lc_at_k(EvalCase(0, ((0, 0.5), (1, 0.5))), ab) == pytest.approx(1 / 3)
    assert lc_at_k(EvalCase(c, ((c, 0.5), (c, 0.5))), tree) == 1.0
    with pytest.raises(ToolkitError):
        lc_at_k(EvalCase(c, ()), tree)


def test_single_case_means(tree):
    c = EvalCase(1, ((0, 0.5), (1, 0.3), (2, 0.2)))
    r3 = evaluate([c], tree, ks=[3])[0]
    assert (r3.pp, r3.cp, r3.lr, r3.lc) == pytest.approx(oracle_metrics(c, tree, 3))
    r1 = evaluate([c], tree, ks=[1])[0]
    assert r1.cp == 0.0 and r1.lc == 1.0


def test_all_correct_predictor(tree):
    cases = [EvalCase(p, ((p, 0.9), ((p + 1) % 4, 0.1))) for p in range(4)]
    for r in evaluate(cases, tree):
        assert r.cp == 1.0 and r.lr == 1.0


def test_empty_prediction_scores_zero(tree):
    r = evaluate([EvalCase(0, ()), EvalCase(0, ((0, 1.0),))], tree, ks=[1])[0]
    assert (r.pp, r.cp, r.lr, r.lc, r.n_cases) == (0.5, 0.5, 0.5, 0.5, 2)
    with pytest.raises(ToolkitError):
        evaluate([], tree)


def test_random_cases_match_oracle(rng):
    tree = random_tree(rng)
    cases = random_cases(rng, tree, 1000)
    results = evaluate(cases, tree, ks=(1, 3, 6))
    for r in results:
        expected = np.mean([oracle_metrics(c, tree, r.k) for c in cases], axis=0)
        assert abs(r.pp - expected[0]) <= 1e-12
        assert abs(r.cp - expected[1]) <= 1e-12
        assert abs(r.lr - expected[2]) <= 1e-12
        assert abs(r.lc - expected[3]) <= 1e-12


def test_nested_list_monotonicity(rng):
    tree = random_tree(rng)
    for c in random_cases(rng, tree, 300):
        prev = None
        for k in range(1, 7):
            t = truncate(c, k)
            cur = (cp_at_k(t), lr_at_k(t, tree), lc_at_k(t, tree))
            if prev:
                assert cur[0] >= prev[0] and cur[1] >= prev[1] and cur[2] <= prev[2]
            prev = cur


@given(st.integers(0, 2**32 - 1))
def test_pp_positive_iff_hit(seed):
    r = np.random.default_rng(seed)
    tree = random_tree(r)
    for c in random_cases(r, tree, 20):
        assert 0.0 <= pp_at_k(c, tree) <= 1.0
        assert (pp_at_k(c, tree) > 0) == (cp_at_k(c) == 1.0)


def test_permutation_invariance(rng):
    tree = random_tree(rng)
    cases = random_cases(rng, tree, 200)
    shuffled = [cases[i] for i in rng.permutation(len(cases))]
    for a, b in zip(evaluate(cases, tree), evaluate(shuffled, tree)):
        assert a.as_dict() == pytest.approx(b.as_dict(), abs=1e-12)


def test_csv_and_table(tree):
    res = evaluate([case(0, 1.0)], tree, ks=[1, 3])
    csv_text = results_csv(res)
    assert csv_text.splitlines()[0] == "metric,k,value,n_cases"
    assert "PP,1,1.000000,1" in csv_text
    assert len(csv_text.splitlines()) == 1 + 8
    assert "100.00%" in results_table(res)
