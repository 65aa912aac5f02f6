"""Command-line front end.

Subcommands: synth, label, train, compare, eval, roc.  Every command is
deterministic for a fixed config and seed, and every failure names the
stage it happened in and exits nonzero.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import evaluation, ga, labeling, mlp
from .config import (
    STREAM_NN,
    STREAM_SPLIT,
    STREAM_SYNTH,
    RunConfig,
    load_config,
)
from .data import (
    AnomalyLabel,
    Dataset,
    derive_seed,
    generate_synthetic,
    load_csv,
    minmax_normalize,
    save_csv,
    stratified_split,
)
from .svgchart import unit_line_chart

__all__ = ["main", "StageError"]

LABEL_NAMES = tuple(label.name for label in AnomalyLabel)


class StageError(Exception):
    """Command failure carrying the name of the pipeline stage."""

    def __init__(self, stage_name: str, message: str):
        super().__init__(message)
        self.stage_name = stage_name


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, str(exc)) from exc


def _say(cfg: RunConfig, message: str) -> None:
    if not cfg.quiet:
        print(message)


def _outdir(cfg: RunConfig) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg.out


def _load_input(cfg: RunConfig, arg_path) -> Dataset:
    path = arg_path or cfg.input
    if not path:
        raise StageError("load", "no input CSV: pass a path or set "
                                 "[data] input in the config")
    with _stage("load"):
        return load_csv(path)


def _require_labels(ds: Dataset) -> None:
    if ds.labels is None:
        raise StageError("load", "dataset has no label column; run "
                                 "'anomtax label' first")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(cfg: RunConfig, out_csv) -> int:
    with _stage("synth"):
        ds = generate_synthetic(cfg.synthetic, derive_seed(cfg.seed,
                                                           STREAM_SYNTH))
    with _stage("write"):
        Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
        save_csv(ds, out_csv)
    _say(cfg, f"wrote {out_csv}: n={ds.n} d={ds.dim}")
    return 0


def _report_rows(reports):
    header = ["#Point", "#Cluster", "#ND", "#CNA", "#CPA", "#PA"]
    rows = [[r.points, r.clusters, r.nd, r.cna, r.cpa, r.pa]
            for r in reports]
    return header, rows


def _write_reports(reports, class_ids, out: Path, cfg: RunConfig):
    header, rows = _report_rows(reports)
    with open(out / "labeling_report.csv", "w", encoding="utf-8") as fh:
        fh.write("class," + ",".join(header) + "\n")
        for class_id, row in zip(class_ids, rows):
            fh.write(f"{class_id}," + ",".join(str(v) for v in row) + "\n")
    lines = []
    for class_id, row in zip(class_ids, rows):
        lines.append(f"sub-dataset (class {class_id})" if class_id != ""
                     else "dataset")
        for name, value in zip(header, row):
            lines.append(f"  {name:<9} {value}")
    text = "\n".join(lines) + "\n"
    (out / "labeling_report.txt").write_text(text, encoding="utf-8")
    _say(cfg, text.rstrip())


def cmd_label(cfg: RunConfig, input_path, relabel: bool) -> int:
    ds = _load_input(cfg, input_path)
    if ds.labels is not None and not relabel:
        raise StageError("label", "input is already labeled; pass --relabel "
                                  "to overwrite its labels")
    out = _outdir(cfg)
    if ds.class_ids is not None:
        with _stage("label"):
            names = ds.feature_names
            retained = [names.index(n) for n in cfg.retained if n in names]
            discarded = [names.index(n) for n in cfg.discarded if n in names]
            if not retained or not discarded:
                raise ValueError(
                    "supervised labeling needs [data] retained and "
                    "discarded feature names matching the CSV header"
                )
            labeled, reports = labeling.label_supervised(
                ds, cfg.labeling, retained, discarded)
        class_ids = sorted(set(int(c) for c in ds.class_ids))
    else:
        with _stage("normalize"):
            normalized, params = minmax_normalize(ds)
            params.save(out / "norm_params.txt")
        with _stage("label"):
            labeled, report = labeling.label_dataset(normalized, cfg.labeling)
        reports = [report]
        class_ids = [""]
    with _stage("write"):
        save_csv(labeled, out / "labeled.csv")
        _write_reports(reports, class_ids, out, cfg)
    _say(cfg, f"wrote {out / 'labeled.csv'}")
    return 0


def _split_and_prepare(cfg: RunConfig, ds: Dataset) -> ga.PreparedSplits:
    with _stage("split"):
        train, val, test = stratified_split(
            ds, cfg.ratios, derive_seed(cfg.seed, STREAM_SPLIT))
        if test.n == 0:
            raise ValueError("empty test split")
        if train.n == 0:
            raise ValueError("empty training split")
        return ga.prepare_splits(train, val, test,
                                 cfg.topology.output_size)


def _write_history(model: mlp.TrainedModel, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,train_mse,val_mse\n")
        for i, train_mse in enumerate(model.train_mse, start=1):
            val = "" if model.val_mse is None else repr(model.val_mse[i - 1])
            fh.write(f"{i},{train_mse!r},{val}\n")


def _emit_model_eval(tag: str, model, x, y, num_classes, out: Path,
                     names=LABEL_NAMES):
    pred = mlp.predict_batch(model, x)
    matrix = evaluation.confusion(y, pred, num_classes, names[:num_classes])
    (out / f"{tag}_confusion.txt").write_text(
        evaluation.format_confusion(matrix), encoding="utf-8")
    evaluation.write_confusion_csv(matrix, out / f"{tag}_confusion.csv")
    evaluation.write_metrics_csv(matrix, out / f"{tag}_metrics.csv")
    _write_roc_files(model, x, y, num_classes, out, tag, names)
    return matrix


def _write_roc_files(model, x, y, num_classes, out: Path, tag: str,
                     names=LABEL_NAMES):
    scores = mlp.forward_batch(model.weights, model.topology, x)
    for c in range(num_classes):
        positives = np.asarray(y) == c
        if positives.all() or not positives.any():
            continue  # ROC undefined with one class absent
        curve = evaluation.roc_curve(scores[:, c], positives)
        name = names[c] if c < len(names) else str(c)
        evaluation.write_roc_csv(curve, out / f"roc_{tag}_{name}.csv")
        svg = unit_line_chart(
            [(f"{tag} {name} (AUC {curve.auc:.3f})",
              [(p[0], p[1]) for p in curve.points])],
            f"ROC {tag} class {name}", "False positive rate",
            "True positive rate")
        (out / f"roc_{tag}_{name}.svg").write_text(svg, encoding="utf-8")


def cmd_train(cfg: RunConfig, input_path) -> int:
    ds = _load_input(cfg, input_path)
    _require_labels(ds)
    prepared = _split_and_prepare(cfg, ds)
    out = _outdir(cfg)
    with _stage("train"):
        rng = np.random.default_rng([derive_seed(cfg.seed, STREAM_NN)])
        model = mlp.train_scg(
            mlp.init_weights(cfg.topology, rng), cfg.topology,
            prepared.x_train, prepared.t_train,
            prepared.x_val, prepared.t_val, cfg.training)
    with _stage("write"):
        mlp.save_model(model, out / "model.txt")
        _write_history(model, out / "history.csv")
        matrix = _emit_model_eval("nn", model, prepared.x_test,
                                  prepared.y_test, cfg.topology.output_size,
                                  out)
    err = evaluation.test_error(matrix)
    _say(cfg, f"trained {model.epochs} epochs (stop: {model.stop_reason}), "
              f"test error {evaluation.fmt_pct(err)}")
    return 0


def cmd_compare(cfg: RunConfig, input_path) -> int:
    ds = _load_input(cfg, input_path)
    _require_labels(ds)
    prepared = _split_and_prepare(cfg, ds)
    out = _outdir(cfg)
    with _stage("compare"):
        report = ga.compare(prepared, cfg.topology, cfg.training, cfg.ga,
                            LABEL_NAMES[:cfg.topology.output_size])
    with _stage("write"):
        mlp.save_model(report.nn_model, out / "nn_model.txt")
        mlp.save_model(report.ga_run.best_model, out / "ga_best_model.txt")
        for tag, matrix in (("nn", report.nn_confusion),
                            ("ga", report.ga_confusion)):
            (out / f"{tag}_confusion.txt").write_text(
                evaluation.format_confusion(matrix), encoding="utf-8")
            evaluation.write_confusion_csv(matrix,
                                           out / f"{tag}_confusion.csv")
            evaluation.write_metrics_csv(matrix, out / f"{tag}_metrics.csv")
        _write_roc_files(report.nn_model, prepared.x_test, prepared.y_test,
                         cfg.topology.output_size, out, "nn")
        _write_roc_files(report.ga_run.best_model, prepared.x_test,
                         prepared.y_test, cfg.topology.output_size, out, "ga")
        with open(out / "tpr_fpr.csv", "w", encoding="utf-8") as fh:
            fh.write("model,class,tpr,fpr\n")
            for tag, matrix in (("nn", report.nn_confusion),
                                ("ga", report.ga_confusion)):
                for c in range(matrix.num_classes):
                    tpr, fpr = evaluation.tpr_fpr(matrix, c)
                    fh.write(f"{tag},{matrix.class_names[c]},"
                             f"{tpr!r},{fpr!r}\n")
        with open(out / "ga_cycles.csv", "w", encoding="utf-8") as fh:
            fh.write("cycle,best_fitness,mean_fitness\n")
            for st in report.ga_run.cycles:
                fh.write(f"{st.cycle},{st.best_fitness!r},"
                         f"{st.mean_fitness!r}\n")
        summary = (f"NN test error {evaluation.fmt_pct(report.nn_error)}, "
                   f"GA test error {evaluation.fmt_pct(report.ga_error)}")
        (out / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    _say(cfg, summary)
    return 0


def _load_model_for(ds: Dataset, model_path):
    with _stage("load"):
        model = mlp.load_model(model_path)
    if model.topology.input_size != ds.dim:
        raise StageError(
            "load",
            f"model expects {model.topology.input_size} input features but "
            f"the dataset has {ds.dim}",
        )
    return model


def cmd_eval(cfg: RunConfig, model_path, input_path) -> int:
    ds = _load_input(cfg, input_path)
    _require_labels(ds)
    model = _load_model_for(ds, model_path)
    out = _outdir(cfg)
    with _stage("eval"):
        matrix = _emit_model_eval("eval", model, ds.features, ds.labels,
                                  model.topology.output_size, out)
    _say(cfg, f"test error {evaluation.fmt_pct(evaluation.test_error(matrix))}")
    return 0


def cmd_roc(cfg: RunConfig, model_path, input_path) -> int:
    ds = _load_input(cfg, input_path)
    _require_labels(ds)
    model = _load_model_for(ds, model_path)
    out = _outdir(cfg)
    with _stage("roc"):
        _write_roc_files(model, ds.features, ds.labels,
                         model.topology.output_size, out, "model")
    _say(cfg, f"wrote ROC files to {out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anomtax",
        description="Label datasets with the four-way anomaly taxonomy "
                    "(ND/CNA/CPA/PA) and train GA-enhanced MLP classifiers.",
    )
    parser.add_argument("--config", help="path to an INI config file")
    parser.add_argument("--seed", type=int, help="run seed (mandatory here "
                                                 "or in the config)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic 2-D dataset")
    p.add_argument("out_csv", help="CSV file to write")

    p = sub.add_parser("label", help="label a dataset with the taxonomy")
    p.add_argument("input", nargs="?", help="input CSV (default from config)")
    p.add_argument("--relabel", action="store_true",
                   help="overwrite existing labels")

    p = sub.add_parser("train", help="train a conventional MLP")
    p.add_argument("input", nargs="?")

    p = sub.add_parser("compare",
                       help="conventional vs GA-enhanced MLP comparison")
    p.add_argument("input", nargs="?")

    p = sub.add_parser("eval", help="evaluate a saved model on a labeled CSV")
    p.add_argument("model")
    p.add_argument("input")

    p = sub.add_parser("roc", help="emit ROC curves for a saved model")
    p.add_argument("model")
    p.add_argument("input")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        with _stage("config"):
            cfg = load_config(args.config, args.seed, args.out, args.quiet)
        if args.command == "synth":
            return cmd_synth(cfg, args.out_csv)
        if args.command == "label":
            return cmd_label(cfg, args.input, args.relabel)
        if args.command == "train":
            return cmd_train(cfg, args.input)
        if args.command == "compare":
            return cmd_compare(cfg, args.input)
        if args.command == "eval":
            return cmd_eval(cfg, args.model, args.input)
        if args.command == "roc":
            return cmd_roc(cfg, args.model, args.input)
        raise StageError("config", f"unknown command {args.command!r}")
    except StageError as exc:
        print(f"error in stage '{exc.stage_name}': {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
