"""Recognition rates, dimensionality sweeps, score histograms and CSV export."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import mlp
from .eigenfaces import FaceSubspace, FeatureVector, build_subspace, project_all
from .errors import ContractError
from .nearest import Gallery, NearestClassifier, distances, enroll

DEFAULT_BINS = 30
DEFAULT_SWEEP = (10, 20, 40, 60, 80, 100, 150, 199)
SERIES = ("genuine-all", "genuine-nearest", "impostor", "nnet-genuine", "nnet-impostor")


@dataclass(frozen=True)
class RecognitionReport:
    classifier: str
    m_prime: int
    correct: int
    total: int
    confusion: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.correct / self.total


@dataclass(frozen=True)
class HistogramData:
    label: str
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _pairs(data) -> tuple[np.ndarray, np.ndarray]:
    data = list(data)
    if not data:
        raise ContractError("evaluation set is empty")
    return np.array([vec for vec, _ in data]), np.array([sid for _, sid in data], dtype=np.int64)


def evaluate(classifier, subspace: FaceSubspace, test) -> RecognitionReport:
    """Project each ``(vector, subject_id)`` test pair and tally the decisions.

    ``classifier`` is anything with ``identify(FeatureVector) -> subject_id``
    and a ``label`` attribute, e.g. :class:`~eigennet.nearest.NearestClassifier`
    or :class:`~eigennet.mlp.MlpClassifier`.
    """
    vectors, labels = _pairs(test)
    coefficients = project_all(subspace, vectors)
    confusion = Counter()
    for row, truth in zip(coefficients, labels):
        predicted = classifier.identify(FeatureVector(row, int(truth)))
        confusion[(int(truth), int(predicted))] += 1
    correct = sum(n for (truth, predicted), n in confusion.items() if truth == predicted)
    return RecognitionReport(
        getattr(classifier, "label", type(classifier).__name__),
        subspace.m_prime,
        correct,
        len(labels),
        dict(sorted(confusion.items())),
    )


def sweep_dimensions(train, test, dims: Sequence[int] = DEFAULT_SWEEP, subspace=None):
    """Nearest-classifier rate at each requested eigenface count.

    The subspace is built once at ``max(dims)`` (or taken from ``subspace``)
    and truncated for every point.
    """
    dims = [int(d) for d in dims]
    if not dims:
        raise ContractError("no dimensions requested")
    train = list(train)
    if subspace is None:
        subspace = build_subspace([vec for vec, _ in train], max(dims))
    results = []
    for d in dims:
        truncated = subspace.truncate(d)
        report = evaluate(NearestClassifier(enroll(truncated, train)), truncated, test)
        results.append((d, report.rate))
    return results


def histogram(values, bins: int = DEFAULT_BINS, label: str = "") -> HistogramData:
    """Equal-width bins over ``[min, max]``; the maximum falls in the last bin.

    A constant input gets bins of width 1 starting at the constant.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ContractError("cannot histogram an empty sequence")
    if bins < 1:
        raise ContractError("bin count must be at least 1")
    low, high = float(values.min()), float(values.max())
    width = (high - low) / bins if high > low else 1.0
    edges = low + width * np.arange(bins + 1)
    if high > low:
        edges[-1] = high
    index = np.clip(np.floor((values - low) / width).astype(np.int64), 0, bins - 1)
    return HistogramData(label, edges, np.bincount(index, minlength=bins))


def score_series(gallery: Gallery, subspace: FaceSubspace, test, net=None) -> dict:
    """Raw genuine/impostor values keyed by series label.

    Classical series use euclidean distances from every probe to every
    model. With ``net``, the network output at the probe's own subject is
    genuine and every other output is impostor.
    """
    vectors, labels = _pairs(test)
    coefficients = project_all(subspace, vectors)
    series = {"genuine-all": [], "genuine-nearest": [], "impostor": []}
    for row, truth in zip(coefficients, labels):
        d = distances(gallery, FeatureVector(row))
        same = gallery.subject_ids == truth
        if same.any():
            series["genuine-all"].extend(d[same])
            series["genuine-nearest"].append(d[same].min())
        series["impostor"].extend(d[~same])
    if net is not None:
        scores = mlp.forward(net, coefficients)
        own = np.zeros_like(scores, dtype=bool)
        own[np.arange(len(labels)), labels - 1] = True
        series["nnet-genuine"] = scores[own]
        series["nnet-impostor"] = scores[~own]
    return {k: np.asarray(v, dtype=np.float64) for k, v in series.items()}


def genuine_impostor_series(gallery, subspace, test, net=None, bins: int = DEFAULT_BINS):
    series = score_series(gallery, subspace, test, net)
    return [histogram(values, bins, label) for label, values in series.items() if values.size]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


_REPORT_HEADER = ["classifier", "m_prime", "correct", "total", "rate", "true_subject", "predicted_subject", "count"]


def _rows(obj):
    if isinstance(obj, RecognitionReport):
        head = [obj.classifier, obj.m_prime, obj.correct, obj.total, obj.rate]
        return _REPORT_HEADER, [
            [*head, truth, predicted, n] for (truth, predicted), n in obj.confusion.items()
        ]
    if isinstance(obj, HistogramData):
        return ["bin_low", "bin_high", "count"], [
            [lo, hi, int(n)] for lo, hi, n in zip(obj.edges[:-1], obj.edges[1:], obj.counts)
        ]
    if isinstance(obj, mlp.TrainReport):
        header = ["epoch", "objective", "best_objective", "learning_rate", "rejected"]
        columns = [obj.objective, obj.best_objective, obj.learning_rate, [int(r) for r in obj.rejected]]
        if obj.validation is not None:
            header.append("validation_mse")
            columns.append(obj.validation)
        return header, [[e + 1, *vals] for e, vals in enumerate(zip(*columns))]
    return ["m_prime", "rate"], [[int(d), float(r)] for d, r in obj]


def export_csv(obj, destination) -> Path:
    """Write a report, histogram, train report or sweep as CSV with a header row."""
    header, rows = _rows(obj)
    path = Path(destination)
    try:
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\r\n")
            writer.writerow(header)
            writer.writerows([[v if isinstance(v, str) else _fmt(v) for v in row] for row in rows])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_report_csv(source) -> RecognitionReport:
    with Path(source).open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    if not rows:
        raise ContractError(f"{source}: no report rows")
    first = rows[0]
    confusion = {
        (int(r["true_subject"]), int(r["predicted_subject"])): int(r["count"]) for r in rows
    }
    return RecognitionReport(
        first["classifier"], int(first["m_prime"]), int(first["correct"]), int(first["total"]), confusion
    )


def read_sweep_csv(source) -> list[tuple[int, float]]:
    with Path(source).open(newline="") as handle:
        return [(int(r["m_prime"]), float(r["rate"])) for r in csv.DictReader(handle)]


def mlp_batch(subspace: FaceSubspace, data, num_subjects: Optional[int] = None) -> mlp.Batch:
    """Eigenface coefficients of ``(vector, subject_id)`` pairs with ±1 targets."""
    vectors, labels = _pairs(data)
    if num_subjects is None:
        num_subjects = int(labels.max())
    return mlp.make_batch(project_all(subspace, vectors), labels, num_subjects)
