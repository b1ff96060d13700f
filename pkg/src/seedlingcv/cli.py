"""Command-line interface.

Subcommands: segment, stats, train-baseline, train-cnn, evaluate,
compare, synth. Exit codes are a stable scripting contract: 0 success,
1 runtime/data failure, 2 usage or configuration failure. Every
subcommand is deterministic given its seed, config, and data, and none
of them writes into the input tree.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .baselines import (
    GridSearchSpec,
    KnnConfig,
    KnnModel,
    SvmModel,
    grid_search,
    knn_fit,
    knn_grid,
    knn_predict,
    svm_fit,
    svm_predict,
)
from .compare import run_comparison
from .config import RunConfig, load_run_config
from .dataset import (
    LabeledDataset,
    SplitSpec,
    class_weights,
    load_features,
    scan_dataset,
    stats_dict,
    stratified_split,
)
from .errors import ConfigError, DatasetError, SeedlingError
from .metrics import comparison_table, confusion, render_confusion, summarize
from .nn import (
    MAGIC_BASELINE,
    MAGIC_CNN,
    build_model,
    load_checkpoint,
    predict,
    read_container,
    save_checkpoint,
    train,
    write_container,
)
from .segmentation import SegmentationConfig, segment_directory
from .synthetic import write_tree
from .tensor import SeededRng

log = logging.getLogger(__name__)


def _replace(cfg, **overrides):
    """dataclasses.replace with validation failures mapped to usage errors."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return cfg
    try:
        return dataclasses.replace(cfg, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid_spec(candidates, folds: int, seed: int) -> GridSearchSpec:
    try:
        return GridSearchSpec(candidates, folds, seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _write_json(path, payload: dict | list) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _split_dataset(data_dir, run: RunConfig, seed: int | None,
                   segmented_dir=None) -> tuple[LabeledDataset, LabeledDataset, list[str]]:
    """Scan and split; with --segmented-dir the precomputed tree is used
    and must mirror the raw tree's class names."""
    ds = scan_dataset(segmented_dir if segmented_dir else data_dir)
    if segmented_dir:
        raw_names = scan_dataset(data_dir).label_map.names
        if raw_names != ds.label_map.names:
            raise DatasetError(
                f"segmented tree classes {ds.label_map.names} do not match data tree {raw_names}"
            )
    spec = _replace(run.split, seed=seed)
    train_ds, val_ds = stratified_split(ds, spec)
    return train_ds, val_ds, ds.label_map.names


def cmd_segment(args) -> int:
    run = load_run_config(args.config)
    written, skipped = segment_directory(args.input, args.output, run.segmentation)
    print(f"processed {written}, skipped {skipped}")
    return 0


def cmd_stats(args) -> int:
    ds = scan_dataset(args.data)
    print(json.dumps(stats_dict(ds), indent=2))
    return 0


def cmd_train_baseline(args) -> int:
    run = load_run_config(args.config)
    seed = args.seed if args.seed is not None else run.split.seed
    size = args.size if args.size is not None else run.cnn.input_size
    segmented_inline = args.segmented_dir is None
    train_ds, val_ds, names = _split_dataset(args.data, run, seed, args.segmented_dir)
    x_train, y_train = load_features(train_ds, size, segmented_inline, run.segmentation)
    x_val, y_val = load_features(val_ds, size, segmented_inline, run.segmentation)

    if args.algo == "knn":
        folds = args.folds if args.folds is not None else run.knn.folds
        ks = knn_grid(x_train.shape[0])
        if run.knn.max_k is not None:
            ks = [k for k in ks if k <= run.knn.max_k] or ks[:1]
        candidates = [KnnConfig(n_neighbours=k) for k in ks]
    else:
        folds = args.folds if args.folds is not None else run.svm.folds
        base = _replace(run.svm.base, seed=seed)
        candidates = [dataclasses.replace(base, C=float(c)) for c in run.svm.c_grid]

    best, table = grid_search(x_train, y_train, _grid_spec(candidates, folds, seed))
    config = {
        "algo": args.algo,
        "params": best.params_dict(),
        "size": size,
        "seed": seed,
        "segmentation": run.segmentation.to_dict(),
        "segmented_input": True,
    }
    if args.algo == "knn":
        model = knn_fit(x_train, y_train)
        preds = knn_predict(model, x_val, best.n_neighbours)
        tensors = [("features", model.features), ("labels", model.labels.astype(np.float64))]
    else:
        model = svm_fit(x_train, y_train, best)
        preds = svm_predict(model, x_val)
        tensors = [("weights", model.weights), ("bias", model.bias)]
    accuracy = float(np.mean(preds == y_val))

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_container(args.out, MAGIC_BASELINE, config, names, tensors)
    _write_json(str(args.out) + ".grid.json",
                {"algo": args.algo, "folds": folds, "seed": seed,
                 "best": best.params_dict(), "results": table})
    print(f"validation accuracy: {accuracy:.4f}")
    return 0


def cmd_train_cnn(args) -> int:
    run = load_run_config(args.config)
    cfg = _replace(run.cnn, epochs=args.epochs, seed=args.seed,
                   attention=True if args.attention else None)
    segmented = not args.no_segmentation
    train_ds, val_ds, names = _split_dataset(args.data, run, cfg.seed)
    cfg = _replace(cfg, num_classes=len(names))
    x_train, y_train = load_features(train_ds, cfg.input_size, segmented, run.segmentation)
    x_val, y_val = load_features(val_ds, cfg.input_size, segmented, run.segmentation)
    shape = (-1, 3, cfg.input_size, cfg.input_size)

    weights = class_weights(train_ds).weights
    rng = SeededRng(cfg.seed)
    model = build_model(cfg, rng)
    model.label_names = names
    history = train(model, (x_train.reshape(shape), y_train),
                    (x_val.reshape(shape), y_val), cfg, weights, rng)
    regime = {"segmented_input": segmented, "segmentation": run.segmentation.to_dict()}
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, args.out, regime)
    _write_json(str(args.out) + ".history.json", history)
    print(f"validation accuracy: {history[-1]['val_acc']:.4f}")
    return 0


def _read_magic(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read(8)
    except OSError as exc:
        raise SeedlingError(f"cannot read model file {path}: {exc.strerror or exc}") from None


def _evaluate_model(model_path, data_dir):
    """(predictions, labels, class names, report meta) for either model kind."""
    run = load_run_config(None)
    magic = _read_magic(model_path)
    if magic == MAGIC_CNN:
        model = load_checkpoint(model_path)
        names = model.label_names or [str(i) for i in range(model.cfg.num_classes)]
        segmented = bool(model.meta.get("segmented_input", True))
        seg_cfg = _seg_from_meta(model.meta, run)
        ds = scan_dataset(data_dir)
        _check_names(ds.label_map.names, names)
        features, labels = load_features(ds, model.cfg.input_size, segmented, seg_cfg)
        preds, _ = predict(model, features.reshape(-1, 3, model.cfg.input_size, model.cfg.input_size))
        meta = {"model": "cnn", "seed": model.cfg.seed,
                "config_sha256": _config_digest({"cnn": model.cfg.to_dict(), **model.meta})}
        return preds, labels, names, meta
    config, names, tensors = read_container(model_path, MAGIC_BASELINE)
    if names is None:
        raise SeedlingError(f"{model_path}: baseline model is missing label names")
    algo = config.get("algo")
    size = int(config.get("size", 64))
    segmented = bool(config.get("segmented_input", True))
    seg_cfg = _seg_from_meta(config, run)
    ds = scan_dataset(data_dir)
    _check_names(ds.label_map.names, names)
    features, labels = load_features(ds, size, segmented, seg_cfg)
    if algo == "knn":
        model = KnnModel(features=tensors["features"].astype(np.float64),
                         labels=tensors["labels"].astype(np.int64),
                         num_classes=len(names))
        preds = knn_predict(model, features, int(config["params"]["n_neighbours"]))
    elif algo == "svm":
        model = SvmModel(weights=tensors["weights"].astype(np.float64),
                         bias=tensors["bias"].astype(np.float64))
        preds = svm_predict(model, features)
    else:
        raise SeedlingError(f"{model_path}: unknown baseline algorithm {algo!r}")
    meta = {"model": algo, "seed": config.get("seed", 0),
            "config_sha256": _config_digest(config)}
    return preds, labels, names, meta


def _seg_from_meta(config: dict, run: RunConfig) -> SegmentationConfig:
    stored = config.get("segmentation")
    if isinstance(stored, dict):
        return SegmentationConfig.from_dict(stored)
    return run.segmentation


def _check_names(data_names: list[str], model_names: list[str]) -> None:
    if list(data_names) != list(model_names):
        raise DatasetError(
            f"data classes {list(data_names)} do not match model classes {list(model_names)}"
        )


def cmd_evaluate(args) -> int:
    preds, labels, names, meta = _evaluate_model(args.model, args.data)
    cm = confusion(preds, labels, names)
    report = summarize(cm, meta)
    Path(args.confusion).parent.mkdir(parents=True, exist_ok=True)
    if args.heatmap:
        Path(args.heatmap).parent.mkdir(parents=True, exist_ok=True)
    render_confusion(cm, args.confusion, args.heatmap)
    _write_json(args.report, report.to_dict(confusion_csv=str(args.confusion)))
    print(f"accuracy: {report.accuracy:.4f}")
    return 0


def cmd_compare(args) -> int:
    run = load_run_config(args.config)
    seed = args.seed if args.seed is not None else run.split.seed
    cnn_cfg = _replace(run.cnn, seed=seed, epochs=args.epochs)
    train_ds, val_ds, names = _split_dataset(args.data, run, seed)
    cnn_cfg = _replace(cnn_cfg, num_classes=len(names))
    size = cnn_cfg.input_size
    features = {}
    features["train_seg"], y_train = load_features(train_ds, size, True, run.segmentation)
    features["val_seg"], y_val = load_features(val_ds, size, True, run.segmentation)
    features["train_raw"], _ = load_features(train_ds, size, False, run.segmentation)
    features["val_raw"], _ = load_features(val_ds, size, False, run.segmentation)

    folds = args.folds if args.folds is not None else run.svm.folds
    if folds < 2:
        raise ConfigError(f"folds must be >= 2, got {folds}")
    result = run_comparison(features, y_train, y_val, names, cnn_cfg,
                            _replace(run.svm.base, seed=seed), run.svm.c_grid,
                            folds, seed, run.knn.max_k)
    table = comparison_table(result["rows"])
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(table + "\n")
    print(table)
    return 0


def cmd_synth(args) -> int:
    if args.per_class < 1:
        raise ConfigError(f"--per-class must be >= 1, got {args.per_class}")
    count = write_tree(args.out, args.seed, args.per_class, args.size)
    print(f"wrote {count} images to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seedlingcv",
        description="Seedling classification: segmentation, baselines, CNN, evaluation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a directory tree of images")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("stats", help="print the class distribution as JSON")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-baseline", help="grid-search and train KNN or SVM")
    p.add_argument("--algo", required=True, choices=["knn", "svm"])
    p.add_argument("--data", required=True)
    p.add_argument("--segmented-dir", help="precomputed segmented tree (skips inline segmentation)")
    p.add_argument("--size", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("train-cnn", help="train the CNN and write a checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--no-segmentation", action="store_true",
                   help="feed normalized raw images instead of segmented ones")
    p.add_argument("--attention", action="store_true", help="enable the attention gate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_cnn)

    p = sub.add_parser("evaluate", help="evaluate a model file on a dataset tree")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--confusion", required=True)
    p.add_argument("--heatmap", help="optional confusion heatmap PPM")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run all four regimes on one shared split")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="write a synthetic 12-class dataset tree")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=22)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=64)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SeedlingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
