"""Top-K path metrics: probability precision, count precision, label recall, label correlation."""

import csv
import io
from dataclasses import dataclass

from gwbowv.errors import ToolkitError

METRICS = ("PP", "CP", "LR", "LC")


@dataclass(frozen=True)
class EvalCase:
    true_path: int
    predictions: tuple  # ((path_id, prob), ...), best first


@dataclass
class EvalResult:
    k: int
    pp: float
    cp: float
    lr: float
    lc: float
    n_cases: int

    def as_dict(self):
        return {"PP": self.pp, "CP": self.cp, "LR": self.lr, "LC": self.lc}


def pp_at_k(case: EvalCase, taxonomy=None):
    total = sum(p for _, p in case.predictions)
    if total <= 0:
        return 0.0
    # a path listed twice still only counts once
    hit = next((p for pid, p in case.predictions if pid == case.true_path), 0.0)
    return hit / total


def cp_at_k(case: EvalCase):
    return 1.0 if any(pid == case.true_path for pid, _ in case.predictions) else 0.0


def _predicted_node_sets(case, taxonomy):
    return [taxonomy.path_nodes(pid) for pid, _ in case.predictions]


def lr_at_k(case: EvalCase, taxonomy):
    true_nodes = taxonomy.path_nodes(case.true_path)
    covered = frozenset().union(*_predicted_node_sets(case, taxonomy))
    return len(true_nodes & covered) / len(true_nodes)


def lc_at_k(case: EvalCase, taxonomy):
    sets = _predicted_node_sets(case, taxonomy)
    if not sets:
        raise ToolkitError("empty_predictions", "LC@K needs at least one predicted path")
    return len(frozenset.intersection(*sets)) / len(frozenset.union(*sets))


def truncate(case: EvalCase, k):
    return EvalCase(case.true_path, tuple(case.predictions[:k]))


def evaluate(cases, taxonomy, ks=(1, 3, 6)):
    """Mean PP/CP/LR/LC for each K, using the first K predictions of every case.

    A case whose list is empty scores 0 on every metric.
    """
    cases = list(cases)
    if not cases:
        raise ToolkitError("empty_cases", "nothing to evaluate")
    results = []
    for k in ks:
        sums = [0.0, 0.0, 0.0, 0.0]
        for case in cases:
            c = truncate(case, k)
            if not c.predictions:
                continue
            sums[0] += pp_at_k(c, taxonomy)
            sums[1] += cp_at_k(c)
            sums[2] += lr_at_k(c, taxonomy)
            sums[3] += lc_at_k(c, taxonomy)
        n = len(cases)
        results.append(EvalResult(k, sums[0] / n, sums[1] / n, sums[2] / n, sums[3] / n, n))
    return results


def results_csv(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "k", "value", "n_cases"])
    for r in results:
        for name, value in r.as_dict().items():
            writer.writerow([name, r.k, f"{value:.6f}", r.n_cases])
    return buf.getvalue()


def results_table(results):
    lines = [f"{'K':>3}  " + "  ".join(f"{m:>7}" for m in METRICS) + f"  {'cases':>7}"]
    for r in results:
        vals = r.as_dict()
        lines.append(f"{r.k:>3}  " + "  ".join(f"{100 * vals[m]:>6.2f}%" for m in METRICS) + f"  {r.n_cases:>7}")
    return "\n".join(lines) + "\n"
