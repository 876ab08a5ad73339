"""Command-line pipeline: synth, embed, featurize, train, predict, evaluate, confusion.

Every subcommand reads one JSON config (``--config``), applies command-line
overrides, and derives all of its random seeds from the single master seed.
Failures print one JSON line ``{"error": code, "detail": ...}`` on stderr
and exit with status 2.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from gwbowv import __version__, confusion, corpus, embeddings, ensemble, featurize, metrics, syngen
from gwbowv import taxonomy as tx
from gwbowv.config import FORMAT_VERSION, EnsembleConfig, RunConfig
from gwbowv.errors import ToolkitError
from gwbowv.fileio import (
    atomic_write_text,
    load_matrix,
    read_json,
    read_jsonl,
    read_jsonl_lines,
    save_matrix,
    write_json,
    write_jsonl,
)
from gwbowv.learners import AnovaSelector, model_from_dict

log = logging.getLogger("gwbowv")

EXIT_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        sys.exit(EXIT_ERROR)


def _emit_error(code, detail):
    print(json.dumps({"error": code, "detail": detail}), file=sys.stderr)


# ----------------------------------------------------------------- config


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_override(data, dotted, value):
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ToolkitError("bad_config", f"--set {dotted}: {key} is not a config section")
        node = node[key]
    if keys[-1] not in node:
        raise ToolkitError("bad_config", f"--set {dotted}: unknown key")
    node[keys[-1]] = value


def load_config(args):
    """Config file, then ``--set`` overrides, then the dedicated global flags."""
    data = RunConfig().to_dict()
    if getattr(args, "config", None):
        _merge(data, read_json(args.config), "config")
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ToolkitError("bad_config", f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        _apply_override(data, key.strip(), _parse_value(value))
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        data["workers"] = args.workers
    cfg = RunConfig.from_dict(data)
    if cfg.format_version != FORMAT_VERSION:
        raise ToolkitError("bad_config", f"unsupported config format_version {cfg.format_version}")
    if cfg.workers < 1:
        raise ToolkitError("bad_config", "workers must be >= 1")
    return cfg


def _merge(base, update, where):
    if not isinstance(update, dict):
        raise ToolkitError("bad_config", f"{where} must be a JSON object")
    for key, value in update.items():
        if key not in base:
            raise ToolkitError("bad_config", f"unknown key in {where}: {key}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, f"{where}.{key}")
        else:
            base[key] = value


def _out_dir(args):
    out = Path(getattr(args, "out_dir", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ----------------------------------------------------------------- inputs


def read_texts(path, cfg: RunConfig):
    """Tokenize every record of a corpus file; the path field is optional here.

    Returns ``(ids, token_lists, rejections)``.
    """
    ids, docs, rejections, seen = [], [], [], set()
    for lineno, line in read_jsonl_lines(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            rejections.append(corpus.Rejection(f"#{lineno}", "malformed"))
            continue
        rid = obj.get("id") if isinstance(obj, dict) else None
        title = obj.get("title", "") if isinstance(obj, dict) else None
        desc = obj.get("description", "") if isinstance(obj, dict) else None
        if not isinstance(rid, str) or not rid or not isinstance(title, str) or not isinstance(desc, str):
            rejections.append(corpus.Rejection(rid if isinstance(rid, str) and rid else f"#{lineno}", "malformed"))
            continue
        if rid in seen:
            rejections.append(corpus.Rejection(rid, "duplicate_id"))
            continue
        seen.add(rid)
        text = corpus.compose_text(title, desc, cfg.title_weight)
        ids.append(rid)
        docs.append(tuple(corpus.tokenize(text, cfg.stop_words, cfg.min_token_length)))
    return ids, docs, rejections


def read_labeled(path, cfg: RunConfig, taxonomy):
    """Ingest a labelled corpus against a frozen taxonomy."""
    records = corpus.read_records(line for _, line in read_jsonl_lines(path))
    return corpus.ingest(
        records, taxonomy, cfg.title_weight, cfg.reject_labels, cfg.stop_words, cfg.min_token_length,
    )


def load_taxonomy(path):
    return tx.TaxonomyTree.from_dict(read_json(path))


def _require(path, what):
    if path is None or not Path(path).exists():
        raise ToolkitError("file_not_found", f"{what}: {path}")
    return Path(path)


def _load_features(path):
    """Feature matrix by manifest path or bare stem."""
    path = Path(path)
    manifest = path if path.suffix == ".json" else path.with_name(path.name + ".json")
    return load_matrix(_require(manifest, "features"))


def _write_rejections(out, name, rejections):
    if rejections:
        write_jsonl(out / name, [r.to_dict() for r in rejections])
        log.info("%d record(s) rejected, see %s", len(rejections), out / name)


# ----------------------------------------------------------------- synth


def cmd_synth(args, cfg: RunConfig):
    out = _out_dir(args)
    synth = replace(cfg.synth, seed=cfg.seed_for("synth"), confusions=[])
    for entry in cfg.synth.confusions:
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise ToolkitError("bad_config", "synth.confusions entries are [leaf_a, leaf_b, overlap]")
        synth = syngen.plant_confusion(synth, entry[:2], entry[2])
    records, taxonomy = syngen.generate(synth)
    train, test = syngen.split_records(records, cfg.test_fraction, cfg.seed_for("split"))
    write_jsonl(out / "corpus.jsonl", [r.to_dict() for r in records])
    write_jsonl(out / "train.jsonl", [r.to_dict() for r in train])
    write_jsonl(out / "test.jsonl", [r.to_dict() for r in test])
    write_json(out / "taxonomy.json", taxonomy.to_dict())
    log.info("synth: %d records (%d train, %d test), %d paths", len(records), len(train), len(test), taxonomy.n_paths)
    return {"records": len(records), "train": len(train), "test": len(test), "paths": taxonomy.n_paths}


# ----------------------------------------------------------------- embed


def cmd_embed(args, cfg: RunConfig):
    out = _out_dir(args)
    _, docs, rejections = read_texts(_require(args.corpus, "corpus"), cfg)
    _write_rejections(out, "embed_rejections.jsonl", rejections)
    sgns = replace(cfg.sgns, seed=cfg.seed_for("sgns"))
    trainer = embeddings.SgnsTrainer(sgns)
    table = trainer.fit([d for d in docs if d])
    target = Path(args.out) if args.out else out / "vectors.txt"
    embeddings.save_vectors(target, table)
    log.info("embed: %d words, dim %d, epoch losses %s", len(table), table.dim, trainer.epoch_losses)
    return {"words": len(table), "dim": table.dim, "epoch_losses": trainer.epoch_losses}


# ----------------------------------------------------------------- featurize


def cmd_featurize(args, cfg: RunConfig):
    out = _out_dir(args)
    ids, docs, rejections = read_texts(_require(args.corpus, "corpus"), cfg)
    _write_rejections(out, f"{args.name}_rejections.jsonl", rejections)
    if args.featurizer:
        fz = featurize.Featurizer.from_dict(read_json(_require(args.featurizer, "featurizer")))
        if args.mode and args.mode != fz.mode:
            raise ToolkitError("bad_mode", f"--mode {args.mode} contradicts featurizer mode {fz.mode}")
    else:
        mode = args.mode or "gwbowv"
        table = None
        if mode != "tfidf":
            table = embeddings.load_vectors(_require(args.vectors, "vectors"))
        fz = featurize.make_featurizer(
            mode, [d for d in docs if d], table,
            n_clusters=cfg.n_clusters, seed=cfg.seed_for("kmeans"), max_iters=cfg.kmeans_max_iters,
            tfidf_dim=cfg.tfidf_dim, normalize=cfg.normalize,
        )
        write_json(out / "featurizer.json", fz.to_dict())
    X, degenerate = fz.transform(docs)
    layout = fz.layout()
    save_matrix(
        out / args.name, X, mode=fz.mode, layout=layout,
        K=layout.get("K"), d=layout.get("d"), ids=ids, degenerate_rows=degenerate,
    )
    log.info("featurize: %d x %d (%s), %d all-zero row(s)", X.shape[0], X.shape[1], fz.mode, len(degenerate))
    return {"rows": X.shape[0], "dims": X.shape[1], "degenerate": len(degenerate)}


# ----------------------------------------------------------------- train


def _aligned_training_rows(features_stem, corpus_path, taxonomy, cfg):
    X, manifest = _load_features(features_stem)
    result = read_labeled(_require(corpus_path, "corpus"), cfg, taxonomy)
    label_of = {d.id: d.path_label for d in result.documents}
    ids = manifest.get("ids")
    if ids is None or len(ids) != X.shape[0]:
        raise ToolkitError("bad_matrix", "feature manifest lacks row ids")
    keep = [i for i, rid in enumerate(ids) if rid in label_of]
    if not keep:
        raise ToolkitError("empty_corpus", "no feature row has a usable label")
    if len(keep) < len(ids):
        log.info("train: %d feature row(s) without a usable label skipped", len(ids) - len(keep))
    y = np.array([label_of[ids[i]] for i in keep], dtype=np.int64)
    return X[keep], y, manifest, result.rejections


def save_bundle(path, model: ensemble.EnsembleModel, taxonomy, featurizer_dict, manifest_extra):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, m in model.bundle.models.items():
        files[name] = f"{name}.json"
        write_json(path / files[name], m.to_dict())
    files["selector"] = "selector.json"
    write_json(path / "selector.json", model.selector.to_dict())
    files["fpp"] = "fpp.json"
    write_json(path / "fpp.json", model.final.to_dict())
    files["taxonomy"] = "taxonomy.json"
    write_json(path / "taxonomy.json", taxonomy.to_dict())
    if featurizer_dict is not None:
        files["featurizer"] = "featurizer.json"
        write_json(path / "featurizer.json", featurizer_dict)
    manifest = {
        "format_version": FORMAT_VERSION,
        "toolkit_version": __version__,
        "feature_dim": model.bundle.input_dim,
        "meta_dim": model.meta_dim,
        "n_paths": model.n_paths,
        "layouts": [b.to_dict() for b in model.bundle.layouts],
        "ensemble": asdict(model.config),
        "files": files,
        **manifest_extra,
    }
    write_json(path / "manifest.json", manifest)
    return manifest


def load_bundle(path):
    """``(EnsembleModel, taxonomy, featurizer or None, manifest)``."""
    path = Path(path)
    if not (path / "manifest.json").exists():
        raise ToolkitError("bundle_not_found", str(path))
    manifest = read_json(path / "manifest.json")
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ToolkitError("bad_bundle", f"unsupported bundle format_version {manifest.get('format_version')}")
    files = manifest["files"]
    for name in files.values():
        if not (path / name).exists():
            raise ToolkitError("bad_bundle", f"missing bundle file {name}")
    layouts = [ensemble.BlockLayout(b["name"], b["offset"], b["labels"]) for b in manifest["layouts"]]
    models = {b.name: model_from_dict(read_json(path / files[b.name])) for b in layouts}
    bundle = ensemble.LevelOneBundle(models, layouts, manifest["feature_dim"])
    model = ensemble.EnsembleModel(
        bundle,
        AnovaSelector.from_dict(read_json(path / files["selector"])),
        model_from_dict(read_json(path / files["fpp"])),
        EnsembleConfig(**manifest["ensemble"]),
        manifest["n_paths"],
    )
    taxonomy = tx.TaxonomyTree.from_dict(read_json(path / files["taxonomy"]))
    fz = None
    if "featurizer" in files:
        fz = featurize.Featurizer.from_dict(read_json(path / files["featurizer"]))
    return model, taxonomy, fz, manifest


def cmd_train(args, cfg: RunConfig):
    out = _out_dir(args)
    taxonomy = load_taxonomy(_require(args.taxonomy, "taxonomy"))
    X, y, fmanifest, rejections = _aligned_training_rows(args.features, args.corpus, taxonomy, cfg)
    _write_rejections(out, "train_rejections.jsonl", rejections)
    ens_cfg = cfg.ensemble
    if args.no_oof:
        ens_cfg = replace(ens_cfg, oof=False)
    seed = cfg.seed_for("ensemble")
    model = ensemble.train_ensemble(X, y, taxonomy, ens_cfg, seed=seed, workers=cfg.workers)
    fz_dict = read_json(_require(args.featurizer, "featurizer")) if args.featurizer else None
    bundle_dir = Path(args.bundle) if args.bundle else out / "bundle"
    extra = {
        "mode": fmanifest.get("mode"),
        "K": fmanifest.get("K"),
        "d": fmanifest.get("d"),
        "seeds": {"master": cfg.seed, "ensemble": seed},
        "n_train": int(X.shape[0]),
    }
    save_bundle(bundle_dir, model, taxonomy, fz_dict, extra)
    log.info("train: %d rows, meta dim %d -> %d selected, bundle %s", X.shape[0], model.meta_dim,
             model.selector.indices.size, bundle_dir)
    return {"rows": int(X.shape[0]), "meta_dim": model.meta_dim, "bundle": str(bundle_dir)}


# ----------------------------------------------------------------- predict


def prediction_rows(ids, ranked, taxonomy):
    return [
        {
            "id": rid,
            "predictions": [
                {"path": taxonomy.path_names(pid), "path_id": pid, "prob": prob} for pid, prob in preds
            ],
        }
        for rid, preds in zip(ids, ranked)
    ]


def cmd_predict(args, cfg: RunConfig):
    if not args.bundle or not (Path(args.bundle) / "manifest.json").exists():
        raise ToolkitError("bundle_not_found", str(args.bundle))
    out = _out_dir(args)
    model, taxonomy, fz, _ = load_bundle(args.bundle)
    k_top = args.k_top or max(cfg.top_k)
    if args.features:
        X, manifest = _load_features(args.features)
        ids = manifest.get("ids") or [f"#{i}" for i in range(X.shape[0])]
    else:
        if fz is None:
            raise ToolkitError("missing_featurizer", "bundle has no featurizer; pass --features")
        ids, docs, rejections = read_texts(_require(args.corpus, "corpus"), cfg)
        _write_rejections(out, "predict_rejections.jsonl", rejections)
        X, _ = fz.transform(docs)
        # training rows went through float32 storage; match them exactly
        X = X.astype(np.float32).astype(np.float64)
    if X.shape[1] != model.bundle.input_dim:
        raise ToolkitError("dimension_mismatch", f"bundle expects {model.bundle.input_dim} features, got {X.shape[1]}")
    if args.path_only:
        ranked = ensemble.predict_path_only(X, model.bundle.models["pp"], k_top)
    else:
        ranked = ensemble.predict_top_k(X, model, k_top)
    target = Path(args.out) if args.out else out / "predictions.jsonl"
    write_jsonl(target, prediction_rows(ids, ranked, taxonomy))
    log.info("predict: %d rows -> %s", len(ids), target)
    return {"rows": len(ids), "predictions": str(target)}


# ----------------------------------------------------------------- evaluate / confusion


def _cases(predictions_path, truth_path, taxonomy, cfg):
    truth = read_labeled(_require(truth_path, "truth"), cfg, taxonomy)
    label_of = {d.id: d.path_label for d in truth.documents}
    cases, missing = [], 0
    for row in read_jsonl(_require(predictions_path, "predictions")):
        if not isinstance(row, dict) or "id" not in row or not isinstance(row.get("predictions"), list):
            raise ToolkitError("bad_predictions", "each line needs id and a predictions list")
        if row["id"] not in label_of:
            missing += 1
            continue
        preds = []
        for p in row["predictions"]:
            try:
                pid, prob = int(p["path_id"]), float(p["prob"])
            except (KeyError, TypeError, ValueError):
                raise ToolkitError("bad_predictions", f"bad prediction entry for {row['id']}") from None
            if not 0 <= pid < taxonomy.n_paths:
                raise ToolkitError("bad_predictions", f"path_id {pid} outside the taxonomy")
            preds.append((pid, prob))
        cases.append(metrics.EvalCase(label_of[row["id"]], tuple(preds)))
    if missing:
        log.info("%d prediction(s) have no usable truth record", missing)
    if not cases:
        raise ToolkitError("empty_cases", "no prediction matches a truth record")
    return cases


def cmd_evaluate(args, cfg: RunConfig):
    out = _out_dir(args)
    taxonomy = load_taxonomy(_require(args.taxonomy, "taxonomy"))
    cases = _cases(args.predictions, args.truth, taxonomy, cfg)
    ks = args.k or cfg.top_k
    results = metrics.evaluate(cases, taxonomy, ks)
    table = metrics.results_table(results)
    atomic_write_text(Path(args.out) if args.out else out / "metrics.csv", metrics.results_csv(results))
    atomic_write_text(out / "metrics.txt", table)
    print(table, end="")
    return {r.k: r.as_dict() for r in results}


def cmd_confusion(args, cfg: RunConfig):
    out = _out_dir(args)
    taxonomy = load_taxonomy(_require(args.taxonomy, "taxonomy"))
    cases = [c for c in _cases(args.predictions, args.truth, taxonomy, cfg) if c.predictions]
    alpha = cfg.alpha if args.alpha is None else args.alpha
    cm = confusion.confusion_matrix(
        [c.true_path for c in cases], [c.predictions[0][0] for c in cases], taxonomy.n_paths,
    )
    graph = confusion.build_graph(cm, alpha, absolute=args.absolute)
    found = confusion.groups(graph, args.mode)
    labels = [" > ".join(taxonomy.path_names(p)) for p in range(taxonomy.n_paths)]
    atomic_write_text(out / "confusion.dot", confusion.export_dot(graph, found, labels))
    atomic_write_text(out / "confusion.csv", confusion.conf_csv(cm, args.absolute, labels))
    summary = {
        "alpha": alpha,
        "mode": args.mode,
        "absolute": args.absolute,
        "groups": [{"path_ids": list(g), "paths": [labels[v] for v in g]} for g in found.groups],
        "isolated": found.isolated,
    }
    write_json(out / "groups.json", summary)
    for g in summary["groups"]:
        print(" | ".join(g["paths"]))
    return summary


# ----------------------------------------------------------------- pipeline


def cmd_pipeline(args, cfg: RunConfig):
    """synth -> embed -> featurize -> train -> predict -> evaluate -> confusion inside one directory."""
    out = _out_dir(args)
    ns = argparse.Namespace
    cmd_synth(ns(out_dir=out), cfg)
    cmd_embed(ns(out_dir=out, corpus=out / "train.jsonl", out=None), cfg)
    cmd_featurize(ns(out_dir=out, corpus=out / "train.jsonl", vectors=out / "vectors.txt", featurizer=None,
                     mode=args.mode, name="train_features"), cfg)
    cmd_train(ns(out_dir=out, features=out / "train_features.json", corpus=out / "train.jsonl",
                 taxonomy=out / "taxonomy.json", featurizer=out / "featurizer.json", bundle=None,
                 no_oof=args.no_oof), cfg)
    cmd_predict(ns(out_dir=out, bundle=str(out / "bundle"), corpus=out / "test.jsonl", features=None,
                   k_top=None, path_only=False, out=None), cfg)
    result = cmd_evaluate(ns(out_dir=out, taxonomy=out / "taxonomy.json", predictions=out / "predictions.jsonl",
                             truth=out / "test.jsonl", k=None, out=None), cfg)
    cmd_confusion(ns(out_dir=out, taxonomy=out / "taxonomy.json", predictions=out / "predictions.jsonl",
                     truth=out / "test.jsonl", alpha=None, mode="weak", absolute=False), cfg)
    return result


def cmd_config(args, cfg: RunConfig):
    text = json.dumps(cfg.to_dict(), indent=1) + "\n"
    if getattr(args, "out_dir", None):
            atomic_write_text(_out_dir(args) / "config.json", text)
    else:
        sys.stdout.write(text)
    return cfg.to_dict()


# ----------------------------------------------------------------- parser


def _global_flags(defaults):
    p = argparse.ArgumentParser(add_help=False)
    sup = argparse.SUPPRESS if not defaults else None
    g = p.add_argument_group("global options")
    g.add_argument("--config", default=sup, help="JSON run config (see `gwbowv config`)")
    g.add_argument("--seed", type=int, default=sup, help="master seed; every component seed derives from it")
    g.add_argument("--workers", type=int, default=sup, help="threads used when fitting forests")
    g.add_argument("--out-dir", default=sup, help="directory for outputs (default: current directory)")
    g.add_argument("--set", action="append", default=sup, metavar="KEY=VALUE",
                   help="override one config entry, e.g. --set sgns.dim=100 (repeatable; VALUE parsed as JSON)")
    g.add_argument("-v", "--verbose", action="store_true", default=sup, help="log progress to stderr")
    return p


def build_parser():
    parser = _Parser(prog="gwbowv", description=__doc__.splitlines()[0], parents=[_global_flags(True)])
    parser.add_argument("--version", action="version", version=f"gwbowv {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    common = [_global_flags(False)]

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, parents=common)
        p.set_defaults(func=func)
        return p

    add("config", cmd_config, "print the effective run config as JSON (or write config.json into --out-dir)")
    add("synth", cmd_synth, "generate a synthetic corpus: corpus/train/test JSON-lines and taxonomy.json")

    p = add("embed", cmd_embed, "train SGNS word vectors on a corpus (word2vec text format)")
    p.add_argument("--corpus", required=True, help="corpus JSON-lines")
    p.add_argument("--out", help="vectors file (default: OUT_DIR/vectors.txt)")

    p = add("featurize", cmd_featurize, "turn a corpus into a feature matrix (manifest .json + float32 .f32)")
    p.add_argument("--corpus", required=True, help="corpus JSON-lines")
    p.add_argument("--mode", choices=featurize.MODES, help="document representation (default gwbowv)")
    p.add_argument("--vectors", help="word vectors; required unless --featurizer is given or mode is tfidf")
    p.add_argument("--featurizer", help="reuse a fitted featurizer.json instead of fitting on this corpus")
    p.add_argument("--name", default="features", help="output stem inside OUT_DIR (default: features)")

    p = add("train", cmd_train, "fit the two-level ensemble and write a model bundle")
    p.add_argument("--features", required=True, help="feature manifest from `featurize`")
    p.add_argument("--corpus", required=True, help="labelled corpus JSON-lines (rows matched by id)")
    p.add_argument("--taxonomy", required=True, help="taxonomy.json")
    p.add_argument("--featurizer", help="featurizer.json to store in the bundle so `predict` can read raw text")
    p.add_argument("--bundle", help="bundle directory (default: OUT_DIR/bundle)")
    p.add_argument("--no-oof", action="store_true",
                   help="build level-two training features from in-sample level-one predictions")

    p = add("predict", cmd_predict, "rank taxonomy paths for each record (JSON-lines)")
    p.add_argument("--bundle", required=True, help="bundle directory from `train`")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="corpus JSON-lines, featurized with the bundle's featurizer")
    src.add_argument("--features", help="precomputed feature manifest")
    p.add_argument("--k-top", type=int, help="paths per record (default: largest configured K)")
    p.add_argument("--path-only", action="store_true", help="rank with the level-one path classifier alone")
    p.add_argument("--out", help="predictions file (default: OUT_DIR/predictions.jsonl)")

    p = add("evaluate", cmd_evaluate, "PP/CP/LR/LC at each K: metrics CSV plus a printed table")
    p.add_argument("--predictions", required=True, help="predictions JSON-lines")
    p.add_argument("--truth", required=True, help="labelled corpus JSON-lines")
    p.add_argument("--taxonomy", required=True, help="taxonomy.json")
    p.add_argument("--k", type=int, nargs="+", help="K values (default: config top_k)")
    p.add_argument("--out", help="metrics CSV (default: OUT_DIR/metrics.csv)")

    p = add("confusion", cmd_confusion, "confusion graph over paths: DOT, CSV and groups.json")
    p.add_argument("--predictions", required=True, help="predictions JSON-lines (top-1 is used)")
    p.add_argument("--truth", required=True, help="labelled corpus JSON-lines")
    p.add_argument("--taxonomy", required=True, help="taxonomy.json")
    p.add_argument("--alpha", type=float, help="edge threshold (default: config alpha)")
    p.add_argument("--mode", choices=confusion.GROUP_MODES, default="weak", help="grouping rule (default weak)")
    p.add_argument("--absolute", action="store_true", help="threshold raw counts instead of row-normalised rates")

    p = add("pipeline", cmd_pipeline, "run synth through confusion end to end inside OUT_DIR")
    p.add_argument("--mode", choices=featurize.MODES, default="gwbowv", help="document representation")
    p.add_argument("--no-oof", action="store_true", help="as for `train`")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        args.func(args, cfg)
    except ToolkitError as exc:
        _emit_error(exc.code, exc.message)
        return EXIT_ERROR
    except OSError as exc:
        _emit_error("io_error", str(exc))
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
