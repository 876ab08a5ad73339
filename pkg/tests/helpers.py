"""Independent oracles shared by the unit and acceptance suites."""

import numpy as np

from gwbowv import taxonomy as tx
from gwbowv.metrics import EvalCase


ACCEPTANCE = []  # (criterion, passed, detail), printed in the terminal summary


def naive_gwbowv(tokens, assignment, K, idf, table):
    d = table.dim
    out = [0.0] * (K * d + K)
    for w in tokens:
        if w not in table or w not in assignment or w not in idf:
            continue
        for k in range(K):
            if assignment[w] == k:
                for j in range(d):
                    out[k * d + j] += float(table.get(w)[j])
                out[K * d + k] += idf[w]
    return np.array(out)


def naive_awv(tokens, table):
    known = [w for w in tokens if w in table]
    out = [0.0] * table.dim
    for w in known:
        for j in range(table.dim):
            out[j] += float(table.get(w)[j])
    return np.array([x / len(known) for x in out]) if known else np.zeros(table.dim)


def naive_bocv(tokens, assignment, K):
    return np.array([float(sum(1 for w in tokens if assignment.get(w) == k)) for k in range(K)])


def random_tree(rng, max_depth=3, width=(1, 4)):
    """A random taxonomy whose paths end at depths 1..max_depth."""
    paths = []

    def grow(prefix):
        depth = len(prefix)
        if depth == max_depth or (depth > 0 and rng.random() < 0.25):
            paths.append(prefix)
            return
        for i in range(int(rng.integers(width[0], width[1] + 1))):
            grow(prefix + [f"n{depth}_{i}"])

    while True:
        paths.clear()
        grow([])
        if any(len(p) == max_depth for p in paths) and len(paths) >= 6:
            return tx.build(paths)


def random_cases(rng, tree, n, max_k=6):
    cases = []
    for _ in range(n):
        k = int(rng.integers(1, max_k + 1))
        ids = rng.choice(tree.n_paths, size=min(k, tree.n_paths), replace=False)
        probs = np.sort(rng.random(ids.size))[::-1]
        if rng.random() < 0.3:
            truth = int(rng.choice(ids))
        else:
            truth = int(rng.integers(tree.n_paths))
        cases.append(EvalCase(truth, tuple((int(i), float(p)) for i, p in zip(ids, probs))))
    return cases


def node_set(tree, pid):
    """Nodes of a path as name prefixes, from the names alone."""
    names = tree.path_names(pid)
    return {tuple(names[:i + 1]) for i in range(len(names))}


def oracle_metrics(case, tree, k):
    """(PP, CP, LR, LC) for the first k predictions, by direct set arithmetic."""
    preds = list(case.predictions)[:k]
    if not preds:
        return 0.0, 0.0, 0.0, 0.0
    total = 0.0
    for _, p in preds:
        total += p
    hit = 0.0
    for pid, p in preds:
        if pid == case.true_path:
            hit = p
            break
    pp = hit / total if total > 0 else 0.0
    cp = 1.0 if any(pid == case.true_path for pid, _ in preds) else 0.0
    truth = node_set(tree, case.true_path)
    sets = [node_set(tree, pid) for pid, _ in preds]
    union = set().union(*sets)
    inter = set(sets[0])
    for s in sets[1:]:
        inter &= s
    return pp, cp, len(truth & union) / len(truth), len(inter) / len(union)
