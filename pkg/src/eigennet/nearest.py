"""Classical eigenface identification: minimum euclidean distance to enrolled models."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigenfaces import FaceSubspace, FeatureVector, project_all
from .errors import ContractError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Gallery:
    """One model per enrolled face: coefficient rows and their subject labels."""

    coefficients: np.ndarray = field(repr=False)
    subject_ids: np.ndarray
    m_prime: int

    def __len__(self):
        return self.coefficients.shape[0]

    @property
    def models(self):
        return [
            (FeatureVector(row, int(sid)), int(sid))
            for row, sid in zip(self.coefficients, self.subject_ids)
        ]


def enroll(subspace: FaceSubspace, train) -> Gallery:
    """Project every ``(vector, subject_id)`` training pair, preserving order."""
    train = list(train)
    if not train:
        raise ContractError("cannot enroll an empty training set")
    coefficients = project_all(subspace, [vec for vec, _ in train])
    labels = np.array([sid for _, sid in train], dtype=np.int64)
    return Gallery(coefficients, labels, subspace.m_prime)


def _check(gallery: Gallery, probe: FeatureVector) -> np.ndarray:
    if len(gallery) == 0:
        raise ContractError("gallery is empty")
    coefficients = np.asarray(probe.coefficients, dtype=np.float64)
    if coefficients.shape != (gallery.m_prime,):
        raise ContractError(
            f"probe has {coefficients.size} coefficients, gallery expects {gallery.m_prime}"
        )
    return coefficients


def distances(gallery: Gallery, probe: FeatureVector) -> np.ndarray:
    """Euclidean distance from the probe to every model, in gallery order."""
    coefficients = _check(gallery, probe)
    return np.sqrt(np.sum((gallery.coefficients - coefficients) ** 2, axis=1))


def all_distances(gallery: Gallery, probe: FeatureVector) -> list[tuple[int, float]]:
    return [(int(sid), float(d)) for sid, d in zip(gallery.subject_ids, distances(gallery, probe))]


def identify(gallery: Gallery, probe: FeatureVector) -> tuple[int, float]:
    """Label and distance of the closest model; ties go to the lowest model index."""
    d = distances(gallery, probe)
    best = int(np.argmin(d))
    return int(gallery.subject_ids[best]), float(d[best])


class NearestClassifier:
    """Adapter giving a gallery the common ``identify(features)`` interface."""

    label = "eigenfaces"

    def __init__(self, gallery: Gallery):
        self.gallery = gallery

    def identify(self, probe: FeatureVector) -> int:
        return identify(self.gallery, probe)[0]


def save_gallery(gallery: Gallery, path) -> None:
    lines = [f"gallery {FORMAT_VERSION} {len(gallery)} {gallery.m_prime}"]
    for sid, row in zip(gallery.subject_ids, gallery.coefficients):
        lines.append(f"{int(sid)} " + " ".join(format(float(v), ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_gallery(path) -> Gallery:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split() if lines else []
    if len(header) != 4 or header[0] != "gallery" or int(header[1]) != FORMAT_VERSION:
        raise ContractError(f"{path}: not a version {FORMAT_VERSION} gallery file")
    count, m_prime = int(header[2]), int(header[3])
    body = [line.split() for line in lines[1 : 1 + count]]
    if len(body) != count or any(len(tok) != m_prime + 1 for tok in body):
        raise ContractError(f"{path}: malformed gallery body")
    labels = np.array([int(tok[0]) for tok in body], dtype=np.int64)
    coefficients = np.array([[float(v) for v in tok[1:]] for tok in body], dtype=np.float64)
    return Gallery(coefficients.reshape(count, m_prime), labels, m_prime)
