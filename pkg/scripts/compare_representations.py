"""Path-only CP@K for gwBoWV, BoCV, AWV and tf-idf over several seeds, same forest config.

    python3 scripts/compare_representations.py --seeds 0 1 2
    python3 scripts/compare_representations.py --set synth.title_tokens=[0,1] --set synth.topic_fraction=0.3
"""

import argparse
from dataclasses import replace

import numpy as np

from gwbowv import cli, ensemble, experiment


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override (repeatable)")
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2], help="master seeds")
    p.add_argument("--modes", nargs="+", default=["gwbowv", "bocv", "awv", "tfidf"], help="representations")
    p.add_argument("--k", type=int, nargs="+", default=[1, 6], help="K values to report")
    args = p.parse_args()
    base = cli.load_config(argparse.Namespace(config=args.config, set=args.set, seed=None, workers=None))

    table_rows = {m: [] for m in args.modes}
    for seed in args.seeds:
        cfg = replace(base, seed=seed)
        split = experiment.synthetic_split(cfg)
        vectors = None
        if any(m != "tfidf" for m in args.modes):
            vectors, _ = experiment.word_vectors(split, cfg)
        for mode in args.modes:
            Xtr, Xte, _ = experiment.features(mode, split, vectors, cfg)
            forest = experiment.path_forest(Xtr, split.y_train, split.taxonomy.n_paths, cfg)
            res = experiment.score(ensemble.predict_path_only(Xte, forest, max(args.k)), split.y_test, split.taxonomy, args.k)
            table_rows[mode].append([res[k].cp for k in args.k])
            print(f"seed {seed} {mode:>7} dim {Xtr.shape[1]:>5}  " + "  ".join(f"CP@{k}={res[k].cp:.4f}" for k in args.k))

    print("\nmean over seeds")
    for mode, rows in table_rows.items():
        means = np.mean(rows, axis=0)
        print(f"{mode:>7}  " + "  ".join(f"CP@{k}={v:.4f}" for k, v in zip(args.k, means)))


if __name__ == "__main__":
    main()
