"""Command-line driver: ``eigennet <command> [options]``.

Artifacts live in ``--out`` and are named ``<label>_<kind>``::

    <label>_subspace.txt   <label>_gallery.txt   <label>_network.txt
    <label>_train.csv      <label>_sweep.csv     <label>_<classifier>-report.csv
    <label>_<series>.csv   (histograms)

Exit status is 0 on success, 1 for contract or configuration errors and 2 for
I/O errors, which include missing or malformed image files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import evaluation, mlp
from .dataset_io import make_split, parse_index_set, read_pgm, scan_orl_layout, vectorize
from .eigenfaces import build_subspace, load_subspace, project, save_subspace
from .errors import ConfigurationError, ContractError, PgmFormatError
from .nearest import NearestClassifier, enroll, identify, load_gallery, save_gallery


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _artifact(args, kind):
    return Path(args.out) / f"{args.label}_{kind}"


def _require(path):
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run the command that produces it first")
    return path


def _split(args):
    images = scan_orl_layout(args.data)
    validation = parse_index_set(args.validation_samples) if args.validation_samples else None
    return make_split(
        images,
        parse_index_set(args.train_samples),
        parse_index_set(args.test_samples),
        validation,
    )


def _train_config(args):
    early = mlp.EarlyStopping(args.patience) if args.early_stop else None
    return mlp.TrainConfig(
        epochs=args.epochs,
        gamma=args.gamma,
        seed=args.seed,
        multi_starts=args.starts,
        initial_learning_rate=args.learning_rate,
        momentum=args.momentum,
        early_stopping=early,
    )


def cmd_build_subspace(args):
    split = _split(args)
    subspace = build_subspace([vec for vec, _ in split.train], args.dim)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    save_subspace(subspace, _artifact(args, "subspace.txt"))
    save_gallery(enroll(subspace, split.train), _artifact(args, "gallery.txt"))
    top = ", ".join(format(v, ".6g") for v in subspace.eigenvalues[:5])
    print(f"M={subspace.source_count} M'={subspace.m_prime} N^2={subspace.dimension}")
    print(f"leading eigenvalues: {top}")


def cmd_train_mlp(args):
    subspace = load_subspace(_require(_artifact(args, "subspace.txt")))
    layers = args.layers
    if layers[0] != subspace.m_prime:
        raise ConfigurationError(
            f"network input size {layers[0]} differs from subspace dimension {subspace.m_prime}"
        )
    split = _split(args)
    num_subjects = layers[-1]
    batch = evaluation.mlp_batch(subspace, split.train, num_subjects)
    validation = None
    if args.early_stop:
        if not split.validation:
            raise ConfigurationError("--early-stop needs --validation-samples")
        validation = evaluation.mlp_batch(subspace, split.validation, num_subjects)
    config = _train_config(args)
    net, report = mlp.train_multistart(layers, batch, config, validation)
    mlp.save_network(net, _artifact(args, "network.txt"), config.gamma)
    evaluation.export_csv(report, _artifact(args, "train.csv"))
    print(
        f"start {report.selected_start} selected; final objective {report.final_objective:.6g}; "
        f"stopped at epoch {report.stop_epoch}"
    )


def _classifier(args, subspace):
    if args.classifier == "mlp":
        net, _ = mlp.load_network(_require(_artifact(args, "network.txt")))
        return mlp.MlpClassifier(net)
    return NearestClassifier(load_gallery(_require(_artifact(args, "gallery.txt"))))


def cmd_evaluate(args):
    subspace = load_subspace(_require(_artifact(args, "subspace.txt")))
    split = _split(args)
    if not split.test:
        raise ContractError("test selection is empty")
    report = evaluation.evaluate(_classifier(args, subspace), subspace, split.test)
    evaluation.export_csv(report, _artifact(args, f"{args.classifier}-report.csv"))
    print(f"{report.classifier} dim={report.m_prime}: {report.correct}/{report.total} = {report.rate:.4f}")


def cmd_sweep(args):
    split = _split(args)
    results = evaluation.sweep_dimensions(split.train, split.test, args.dims)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    evaluation.export_csv(results, _artifact(args, "sweep.csv"))
    for dim, rate in results:
        print(f"{dim:4d} {rate:.4f}")


def cmd_identify(args):
    subspace = load_subspace(_require(_artifact(args, "subspace.txt")))
    probe = project(subspace, vectorize(read_pgm(args.image)))
    if args.classifier == "mlp":
        net, _ = mlp.load_network(_require(_artifact(args, "network.txt")))
        subject, scores = mlp.classify(net, probe)
        print(f"subject {subject} score {scores[subject - 1]:.6f} (next best {np.sort(scores)[-2]:.6f})")
    else:
        subject, distance = identify(load_gallery(_require(_artifact(args, "gallery.txt"))), probe)
        print(f"subject {subject} distance {distance:.6f}")


def cmd_histograms(args):
    subspace = load_subspace(_require(_artifact(args, "subspace.txt")))
    gallery = load_gallery(_require(_artifact(args, "gallery.txt")))
    network = _artifact(args, "network.txt")
    net = mlp.load_network(network)[0] if network.exists() else None
    split = _split(args)
    for hist in evaluation.genuine_impostor_series(gallery, subspace, split.test, net, args.bins):
        path = evaluation.export_csv(hist, _artifact(args, f"{hist.label}.csv"))
        print(f"{hist.label}: {hist.total} values -> {path}")


def build_parser():
    parser = argparse.ArgumentParser(prog="eigennet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    artifacts = argparse.ArgumentParser(add_help=False)
    artifacts.add_argument("--out", default=".", help="artifact directory")
    artifacts.add_argument("--label", default="run", help="artifact name prefix")
    dataset = argparse.ArgumentParser(add_help=False)
    dataset.add_argument("--data", required=True, help="ORL root containing s1..s40")
    dataset.add_argument("--dim", type=int, default=80, help="eigenfaces kept")
    dataset.add_argument("--train-samples", default="1-5")
    dataset.add_argument("--test-samples", default="6-10")
    dataset.add_argument("--validation-samples", default="")

    def add(name, func, help_text, *, data=True):
        parents = [artifacts, dataset] if data else [artifacts]
        p = sub.add_parser(name, parents=parents, help=help_text)
        p.set_defaults(func=func)
        return p

    add("build-subspace", cmd_build_subspace, "build eigenfaces and the nearest-neighbor gallery")

    p = add("train-mlp", cmd_train_mlp, "train the multilayer perceptron")
    p.add_argument("--layers", type=_int_list, default=[80, 40, 40])
    p.add_argument("--epochs", type=int, default=4000)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--early-stop", action="store_true")
    p.add_argument("--patience", type=int, default=50)

    for p in (
        add("evaluate", cmd_evaluate, "recognition rate on the test samples"),
        add("identify", cmd_identify, "identify a single PGM image", data=False),
    ):
        p.add_argument("--classifier", choices=["nearest", "mlp"], default="nearest")
    p.add_argument("image")

    p = add("sweep", cmd_sweep, "nearest-classifier rate versus eigenface count")
    p.add_argument("--dims", type=_int_list, default=list(evaluation.DEFAULT_SWEEP))

    p = add("histograms", cmd_histograms, "genuine/impostor histogram CSVs")
    p.add_argument("--bins", type=int, default=evaluation.DEFAULT_BINS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (OSError, PgmFormatError) as exc:
        print(f"eigennet: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"eigennet: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
