"""Eigenface subspaces built with the snapshot (``AᵀA``) method.

Training images are centered on their mean face, the small ``M x M`` Gram
matrix of the centered images is diagonalized, and each of its eigenvectors
is lifted back to image space as a linear combination of the centered
images. Lifted eigenfaces are renormalized to unit length, and eigenvalues
are reported on the ``1/M`` covariance scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, ReducedRankError
from .numerics import gram, sym_eigen

DEFAULT_M_PRIME = 80
RANK_TOL = 1e-10
FORMAT_VERSION = 1


@dataclass(frozen=True)
class FaceSubspace:
    """Mean face plus ``m_prime`` orthonormal eigenfaces (stored as rows)."""

    mean: np.ndarray = field(repr=False)
    eigenfaces: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    source_count: int

    @property
    def m_prime(self) -> int:
        return self.eigenfaces.shape[0]

    @property
    def dimension(self) -> int:
        return self.mean.shape[0]

    def truncate(self, m_prime: int) -> "FaceSubspace":
        """The leading ``m_prime`` eigenfaces; equal to rebuilding at that size."""
        if not 1 <= m_prime <= self.m_prime:
            raise ContractError(f"cannot truncate {self.m_prime} eigenfaces to {m_prime}")
        return FaceSubspace(
            self.mean, self.eigenfaces[:m_prime], self.eigenvalues[:m_prime], self.source_count
        )


@dataclass(frozen=True)
class FeatureVector:
    coefficients: np.ndarray
    subject_id: Optional[int] = None

    def __len__(self):
        return len(self.coefficients)


def _stack(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        rows = vectors
    else:
        vectors = list(vectors)
        if not vectors:
            raise ContractError("need at least one training vector")
        lengths = {np.shape(v) for v in vectors}
        if len(lengths) != 1:
            raise ContractError(f"training vectors have mixed shapes: {sorted(lengths)}")
        rows = np.array(vectors)
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ContractError(f"expected a non-empty sequence of vectors, got shape {rows.shape}")
    return rows


def compute_mean(train) -> np.ndarray:
    """Componentwise average, accumulated as offsets from the first vector."""
    rows = _stack(train)
    return rows[0] + (rows - rows[0]).sum(axis=0) / rows.shape[0]


def center(train, mean) -> np.ndarray:
    """The ``N² x M`` matrix whose columns are the mean-subtracted faces."""
    rows = _stack(train)
    mean = np.asarray(mean, dtype=np.float64)
    if mean.shape != (rows.shape[1],):
        raise ContractError(f"mean of length {mean.size} does not match vectors of length {rows.shape[1]}")
    return (rows - mean).T


def usable_rank(eigenvalues) -> int:
    eigenvalues = np.asarray(eigenvalues)
    if eigenvalues.size == 0 or eigenvalues[0] <= 0:
        return 0
    return int(np.count_nonzero(eigenvalues > RANK_TOL * eigenvalues[0]))


def build_subspace(train, m_prime: int = DEFAULT_M_PRIME) -> FaceSubspace:
    rows = _stack(train)
    count = rows.shape[0]
    if count < 2:
        raise ContractError("need at least two training vectors")
    if not 1 <= m_prime <= count:
        raise ContractError(f"m_prime must lie in 1..{count}, got {m_prime}")

    mean = compute_mean(rows)
    a = center(rows, mean)
    decomposition = sym_eigen(gram(a))
    rank = usable_rank(decomposition.eigenvalues)
    if m_prime > rank:
        raise ReducedRankError(m_prime, rank)

    lifted = a @ decomposition.eigenvectors[:, :m_prime]
    lifted /= np.linalg.norm(lifted, axis=0)
    return FaceSubspace(
        mean=mean,
        eigenfaces=np.ascontiguousarray(lifted.T),
        eigenvalues=decomposition.eigenvalues[:m_prime] / count,
        source_count=count,
    )


def project(subspace: FaceSubspace, face, subject_id=None) -> FeatureVector:
    face = np.asarray(face, dtype=np.float64)
    if face.shape != subspace.mean.shape:
        raise ContractError(
            f"face of length {face.size} does not match subspace dimension {subspace.dimension}"
        )
    return FeatureVector(subspace.eigenfaces @ (face - subspace.mean), subject_id)


def project_all(subspace: FaceSubspace, faces) -> np.ndarray:
    """Coefficient rows for a batch of faces, shape ``(len(faces), m_prime)``."""
    rows = _stack(faces)
    if rows.shape[1] != subspace.dimension:
        raise ContractError(
            f"faces of length {rows.shape[1]} do not match subspace dimension {subspace.dimension}"
        )
    return (rows - subspace.mean) @ subspace.eigenfaces.T


def reconstruct(subspace: FaceSubspace, features: FeatureVector) -> np.ndarray:
    return subspace.mean + features.coefficients @ subspace.eigenfaces


def _line(values) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def _floats(line: str, expected: int, what: str) -> np.ndarray:
    values = np.array([float(tok) for tok in line.split()], dtype=np.float64)
    if values.size != expected:
        raise ContractError(f"{what}: expected {expected} values, found {values.size}")
    return values


def save_subspace(subspace: FaceSubspace, path) -> None:
    """Write the flat text format: header, mean, one line per eigenface, eigenvalues."""
    lines = [
        f"eigenfaces {FORMAT_VERSION} {subspace.dimension} {subspace.m_prime} {subspace.source_count}",
        _line(subspace.mean),
        *(_line(u) for u in subspace.eigenfaces),
        _line(subspace.eigenvalues),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_subspace(path) -> FaceSubspace:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split() if lines else []
    if len(header) != 5 or header[0] != "eigenfaces":
        raise ContractError(f"{path}: not an eigenface subspace file")
    if int(header[1]) != FORMAT_VERSION:
        raise ContractError(f"{path}: unsupported format version {header[1]}")
    dim, m_prime, count = (int(tok) for tok in header[2:])
    if len(lines) < m_prime + 3:
        raise ContractError(f"{path}: truncated subspace file")
    mean = _floats(lines[1], dim, "mean")
    eigenfaces = np.array([_floats(lines[2 + k], dim, f"eigenface {k}") for k in range(m_prime)])
    eigenvalues = _floats(lines[2 + m_prime], m_prime, "eigenvalues")
    return FaceSubspace(mean, eigenfaces.reshape(m_prime, dim), eigenvalues, count)
