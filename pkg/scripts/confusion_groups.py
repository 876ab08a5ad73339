"""Plant a confused leaf pair, train the path classifier, and list confusion groups.

    python3 scripts/confusion_groups.py --pair 0 1 --overlaps 0 0.4 0.8 --alpha 0.1
"""

import argparse
from pathlib import Path

from gwbowv import cli, confusion, experiment, syngen


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override (repeatable)")
    p.add_argument("--pair", type=int, nargs=2, default=[0, 1], help="leaf indices (depth-first order)")
    p.add_argument("--overlaps", type=float, nargs="+", default=[0.0, 0.4, 0.8], help="shared vocabulary fractions")
    p.add_argument("--alpha", type=float, help="edge threshold (default: config alpha)")
    p.add_argument("--mode", default="weak", choices=confusion.GROUP_MODES, help="grouping rule")
    p.add_argument("--dot-dir", help="write one DOT file per overlap here")
    args = p.parse_args()
    cfg = cli.load_config(argparse.Namespace(config=args.config, set=args.set, seed=args.seed, workers=None))
    alpha = cfg.alpha if args.alpha is None else args.alpha

    for overlap in args.overlaps:
        split = experiment.synthetic_split(cfg, syngen.plant_confusion(cfg.synth, tuple(args.pair), overlap))
        table, _ = experiment.word_vectors(split, cfg)
        Xtr, Xte, _ = experiment.features("gwbowv", split, table, cfg)
        forest = experiment.path_forest(Xtr, split.y_train, split.taxonomy.n_paths, cfg)
        cm = confusion.confusion_matrix(split.y_test, forest.predict(Xte), split.taxonomy.n_paths)
        graph = confusion.build_graph(cm, alpha)
        found = confusion.groups(graph, args.mode)
        a, b = args.pair
        rates = confusion.confusion_values(cm)
        print(f"overlap {overlap:.2f}: Conf({a},{b})={rates[a, b]:.3f} Conf({b},{a})={rates[b, a]:.3f} "
              f"edges={len(graph.edges)} groups={found.groups}")
        if args.dot_dir:
            labels = [" > ".join(split.taxonomy.path_names(i)) for i in range(split.taxonomy.n_paths)]
            out = Path(args.dot_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"confusion_{overlap:.2f}.dot").write_text(confusion.export_dot(graph, found, labels))


if __name__ == "__main__":
    main()
