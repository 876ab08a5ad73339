"""Synthetic corpus -> SGNS -> gwBoWV -> path-only forest and two-level ensemble.

Prints stage timings and PP/CP/LR/LC for both predictors.

    python3 scripts/run_synthetic_pipeline.py --seed 0
    python3 scripts/run_synthetic_pipeline.py --set synth.tokens_per_doc=[6,10] --set synth.topic_fraction=0.4
"""

import argparse
import json
import warnings

from gwbowv import cli, ensemble, experiment, metrics


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, help="forest threads")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override (repeatable)")
    p.add_argument("--mode", default="gwbowv", choices=["gwbowv", "awv", "bocv", "tfidf"], help="representation")
    p.add_argument("--no-oof", action="store_true", help="in-sample level-one features for the meta learner")
    p.add_argument("--json", help="write the results here as JSON")
    args = p.parse_args()
    cfg = cli.load_config(args)
    if args.no_oof:
        cfg.ensemble.oof = False

    timer = experiment.Timer()
    split = experiment.synthetic_split(cfg)
    timer.lap("synth")
    table, losses = experiment.word_vectors(split, cfg) if args.mode != "tfidf" else (None, [])
    timer.lap("sgns")
    Xtr, Xte, _ = experiment.features(args.mode, split, table, cfg)
    timer.lap("features")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        model = experiment.train_ensemble(Xtr, split, cfg)
    timer.lap("ensemble")
    ks = tuple(cfg.top_k)
    k_top = max(ks)
    path_only = experiment.score(ensemble.predict_path_only(Xte, model.bundle.models["pp"], k_top), split.y_test, split.taxonomy, ks)
    full = experiment.score(ensemble.predict_top_k(Xte, model, k_top), split.y_test, split.taxonomy, ks)
    timer.lap("predict")

    print(f"{len(split.train)} train / {len(split.test)} test docs, {split.taxonomy.n_paths} paths, "
          f"{split.taxonomy.n_nodes} nodes, feature dim {Xtr.shape[1]}, meta dim {model.meta_dim}")
    if losses:
        print("sgns epoch losses:", " ".join(f"{x:.4f}" for x in losses))
    print("timings:", ", ".join(f"{k} {v:.1f}s" for k, v in timer.laps.items()), f"(total {timer.total:.1f}s)")
    print("\npath-only\n" + metrics.results_table(list(path_only.values())))
    print("ensemble\n" + metrics.results_table(list(full.values())))
    if args.json:
        out = {"path_only": {k: r.as_dict() for k, r in path_only.items()},
               "ensemble": {k: r.as_dict() for k, r in full.items()}, "timings": timer.laps}
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=1)


if __name__ == "__main__":
    main()
