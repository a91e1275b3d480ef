"""Command-line entry point: ``dgassoc {synth,ingest,train,predict,eval}``.

Settings resolve as command-line flag > ``--config`` file (flat ``key=value``
lines) > built-in default.  Every command writes a ``run_manifest.<command>.json``
next to its outputs recording the resolved settings and input digests.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import synth
from .corpus import CorpusError, iter_corpus
from .dataset import (POLICIES, GoldStandard, build_dataset, evaluate, evaluate_baseline, fit_baseline,
                      predict_for_disease, read_dataset, write_dataset, write_predictions)
from .features import DEFAULT_GROUPS, FeatureSchema, feature_matrix, featurize, fit_schema, parse_groups, write_vectors
from .metrics import HEADER as METRICS_HEADER
from .store import StoreFormatError, TripleStore
from .svm import ConvergenceError, SvmModel, default_grid, grid_search

logger = logging.getLogger("dgassoc")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3

DEFAULTS = {
    "seed": 42,
    "k": 50,
    "groups": ",".join(DEFAULT_GROUPS),
    "folds": 5,
    "tol": 1e-3,
    "max_iter": 0,
    "c_values": "",
    "gamma_values": "",
    "odds_correction": 0.5,
    "policy": "cooccurring",
    "threads": 1,
    "test_fraction": 0.2,
    "n_diseases": 40,
    "n_genes": 120,
    "n_docs": 300,
    "assoc_density": 0.05,
    "signal_strength": 0.6,
    "interaction_density": 0.02,
    "noise_rate": 0.05,
}
_TYPES = {k: type(v) for k, v in DEFAULTS.items()}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path: str | Path) -> dict[str, str]:
    config = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        config[key.replace("-", "_")] = value
    return config


def resolve(args: argparse.Namespace, keys) -> dict:
    config = read_config(args.config) if args.config else {}
    out = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None and key in config:
            value = config[key]
        if value is None:
            value = DEFAULTS[key]
        try:
            out[key] = _TYPES[key](value)
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None
    return out


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _require(*paths) -> None:
    for p in paths:
        if not Path(p).exists():
            raise UsageError(f"input file {p} does not exist")


def write_manifest(out_dir: Path, command: str, settings: dict, inputs: dict[str, Path]) -> None:
    manifest = {
        "command": command,
        "settings": settings,
        "inputs": {name: {"path": str(p), "sha256": _digest(Path(p))} for name, p in sorted(inputs.items())},
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"run_manifest.{command}.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _grid(settings: dict) -> list[tuple[float, float]]:
    if not settings["c_values"] and not settings["gamma_values"]:
        return default_grid()
    default = default_grid()
    cs = [float(v) for v in settings["c_values"].split(",") if v] or sorted({c for c, _ in default})
    gs = [float(v) for v in settings["gamma_values"].split(",") if v] or sorted({g for _, g in default})
    return [(c, g) for c in cs for g in gs]


def _model_paths(args) -> tuple[Path, Path]:
    if args.model_dir:
        base = Path(args.model_dir)
        return Path(args.model or base / "model.svm"), Path(args.schema or base / "schema.tsv")
    if not args.model:
        raise UsageError("either --model-dir or --model is required")
    model = Path(args.model)
    return model, Path(args.schema or model.with_name("schema.tsv"))


def _load_model(model_path: Path, schema_path: Path) -> tuple[SvmModel, FeatureSchema]:
    model = SvmModel.load(model_path)
    schema = FeatureSchema.load(schema_path)
    if model.schema_hash != schema.digest():
        raise ValueError(f"model {model_path} was not trained with schema {schema_path}")
    return model, schema


# -- commands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    keys = ("n_diseases", "n_genes", "n_docs", "assoc_density", "signal_strength",
            "interaction_density", "noise_rate", "seed")
    settings = resolve(args, keys)
    config = synth.SynthConfig(**settings)
    paths = synth.generate(config, args.out)
    write_manifest(Path(args.out), "synth", settings, {})
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_ingest(args) -> int:
    _require(args.corpus)
    store = TripleStore.build(iter_corpus(args.corpus))
    out = Path(args.store)
    out.parent.mkdir(parents=True, exist_ok=True)
    store.persist(out)
    write_manifest(out.parent, "ingest", {"store": str(out)}, {"corpus": Path(args.corpus)})
    print(store.stats().summary())
    return EXIT_OK


def cmd_train(args) -> int:
    _require(args.store, args.gold)
    settings = resolve(args, ("seed", "k", "groups", "folds", "tol", "max_iter", "c_values", "gamma_values",
                              "odds_correction", "threads", "test_fraction"))
    groups = parse_groups(settings["groups"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    store = TripleStore.load(args.store)
    gold = GoldStandard.load(args.gold)
    train_set, test_set = build_dataset(gold, store, settings["seed"], settings["test_fraction"])
    write_dataset((train_set, test_set), out / "dataset.tsv")

    schema = fit_schema(store, train_set.pairs, train_set.labels, groups, settings["k"],
                        settings["odds_correction"])
    schema.persist(out / "schema.tsv")
    write_vectors((featurize(store, p, schema, y) for p, y in train_set.examples), schema, out / "train.vectors")
    write_vectors((featurize(store, p, schema, y) for p, y in test_set.examples), schema, out / "test.vectors")

    X = feature_matrix(store, train_set.pairs, schema)
    report = grid_search(X, train_set.labels, _grid(settings), settings["folds"], settings["seed"],
                         settings["tol"], settings["max_iter"] or None, threads=settings["threads"],
                         schema_hash=schema.digest())
    report.model.persist(out / "model.svm")

    model_metrics = evaluate(report.model, schema, store, test_set)
    threshold = fit_baseline(store, train_set)
    baseline_metrics = evaluate_baseline(store, threshold, test_set)

    with open(out / "metrics.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"system\t{METRICS_HEADER}\n")
        fh.write(f"model\t{model_metrics.row()}\n")
        fh.write(f"baseline\t{baseline_metrics.row()}\n")
    summary = {
        "settings": settings,
        "schema_sha256": schema.digest(),
        "dataset": {
            "train": len(train_set), "test": len(test_set),
            "train_positive": sum(1 for y in train_set.labels if y > 0),
            "test_positive": sum(1 for y in test_set.labels if y > 0),
        },
        "grid_search": report.to_dict(),
        "baseline_threshold": threshold,
        "test": {
            "model": {"precision": model_metrics.precision, "recall": model_metrics.recall, "f1": model_metrics.f1},
            "baseline": {"precision": baseline_metrics.precision, "recall": baseline_metrics.recall,
                         "f1": baseline_metrics.f1},
        },
    }
    (out / "report.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    write_manifest(out, "train", settings, {"store": Path(args.store), "gold": Path(args.gold)})
    print(f"chosen C={report.chosen[0]:g} gamma={report.chosen[1]:g}")
    print(f"model     {model_metrics.summary()}")
    print(f"baseline  {baseline_metrics.summary()}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model_path, schema_path = _model_paths(args)
    _require(args.store, model_path, schema_path)
    settings = resolve(args, ("policy",))
    if settings["policy"] not in POLICIES:
        raise UsageError(f"--policy must be one of {', '.join(POLICIES)}")
    store = TripleStore.load(args.store)
    model, schema = _load_model(model_path, schema_path)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if not store.has_disease(args.disease):
        logger.warning("disease %s is not in the store; writing an empty file", args.disease)
        out.write_text("", encoding="utf-8")
    else:
        hits = predict_for_disease(store, args.disease, model, schema, settings["policy"])
        write_predictions(hits, out)
        print(f"{len(hits)} candidate genes for {args.disease}")
    settings["disease"] = args.disease
    write_manifest(out.parent, "predict", settings,
                   {"store": Path(args.store), "model": model_path, "schema": schema_path})
    return EXIT_OK


def cmd_eval(args) -> int:
    model_path, schema_path = _model_paths(args)
    _require(args.store, args.dataset, model_path, schema_path)
    store = TripleStore.load(args.store)
    model, schema = _load_model(model_path, schema_path)
    splits = read_dataset(args.dataset)
    if args.split not in splits:
        raise ValueError(f"dataset has no {args.split!r} split")
    metrics = evaluate(model, schema, store, splits[args.split])
    line = f"model\t{metrics.row()}\n"
    text = f"system\t{METRICS_HEADER}\n{line}"
    if args.baseline_threshold is not None:
        base = evaluate_baseline(store, args.baseline_threshold, splits[args.split])
        text += f"baseline\t{base.row()}\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        write_manifest(Path(args.out).parent, "eval", {"split": args.split},
                       {"store": Path(args.store), "dataset": Path(args.dataset), "model": model_path})
    sys.stdout.write(text)
    print(metrics.summary(), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dgassoc", description="Disease-gene association prediction from annotated documents.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="flat key=value settings file")
        p.add_argument("--threads", type=int, help="worker cap for grid search")

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted associations")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    for key in ("n_diseases", "n_genes", "n_docs", "seed"):
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=int)
    for key in ("assoc_density", "signal_strength", "interaction_density", "noise_rate"):
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="build the triple store from a corpus")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--store", required=True, help="output store file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="build the dataset, select features, grid-search and train the SVM")
    common(p)
    p.add_argument("--store", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int, help="number of signature features kept")
    p.add_argument("--groups", help="comma-separated feature groups (or cbf, gbf, all)")
    p.add_argument("--folds", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int, help="SMO iteration cap (0 = automatic)")
    p.add_argument("--c-values", dest="c_values", help="comma-separated C grid")
    p.add_argument("--gamma-values", dest="gamma_values", help="comma-separated gamma grid")
    p.add_argument("--odds-correction", dest="odds_correction", type=float)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.set_defaults(func=cmd_train)

    for name, func, help_text in (("predict", cmd_predict, "rank candidate genes for one disease"),
                                  ("eval", cmd_eval, "evaluate a trained model on a dataset split")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.add_argument("--store", required=True)
        p.add_argument("--model-dir")
        p.add_argument("--model")
        p.add_argument("--schema")
        p.set_defaults(func=func)
    predict_p, eval_p = sub.choices["predict"], sub.choices["eval"]
    predict_p.add_argument("--disease", required=True)
    predict_p.add_argument("--policy", choices=POLICIES)
    predict_p.add_argument("--out", required=True, help="predictions TSV")
    eval_p.add_argument("--dataset", required=True)
    eval_p.add_argument("--split", default="test")
    eval_p.add_argument("--baseline-threshold", dest="baseline_threshold", type=float)
    eval_p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dgassoc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"dgassoc: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (CorpusError, StoreFormatError, ValueError, OSError) as exc:
        print(f"dgassoc: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
