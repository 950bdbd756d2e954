"""Synthetic face-like PGM trees in the ORL layout.

Used by the test-suite and the notebooks when the real database is not at
hand. Each subject is a fixed mixture of smooth blob images; each sample adds
shared nuisance variation (pose/expression-like blobs and a lighting ramp,
larger than the identity signal) plus pixel noise. Nuisance directions
therefore dominate the leading principal components, as they tend to on real
faces.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset_io import FaceImage, dump_pgm


def _blob_basis(rng, count, width, height, blobs=6):
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    basis = np.zeros((count, height, width))
    for k in range(count):
        for _ in range(blobs):
            cx, cy = rng.uniform(0, width), rng.uniform(0, height)
            sigma = rng.uniform(0.06, 0.2) * min(width, height)
            basis[k] += rng.choice([-1.0, 1.0]) * np.exp(
                -((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2)
            )
        basis[k] /= np.abs(basis[k]).max()
    return basis


def synthetic_faces(
    subjects=40,
    samples=10,
    width=92,
    height=112,
    seed=0,
    identity_strength=25.0,
    nuisance_strength=30.0,
    noise=8.0,
) -> list[FaceImage]:
    """Images sorted by ``(subject_id, sample_index)``, ids starting at 1."""
    rng = np.random.default_rng(seed)
    identity_basis = _blob_basis(rng, 24, width, height)
    nuisance_basis = _blob_basis(rng, 8, width, height)
    base = 110.0 + 40.0 * _blob_basis(rng, 1, width, height)[0]
    ramp_x = np.linspace(-1.0, 1.0, width)[None, :] * np.ones((height, 1))

    images = []
    for subject in range(1, subjects + 1):
        face = base + identity_strength * np.tensordot(
            rng.standard_normal(len(identity_basis)), identity_basis, axes=1
        )
        for sample in range(1, samples + 1):
            variation = nuisance_strength * np.tensordot(
                rng.standard_normal(len(nuisance_basis)), nuisance_basis, axes=1
            )
            lighting = rng.normal(0.0, 15.0) * ramp_x + rng.normal(0.0, 10.0)
            pixels = face + variation + lighting + rng.normal(0.0, noise, size=face.shape)
            pixels = np.clip(np.rint(pixels), 0, 255).astype(np.uint8)
            images.append(FaceImage(width, height, pixels.ravel(), subject, sample))
    return images


def write_orl_tree(root, images) -> Path:
    """Write ``images`` as ``<root>/s<k>/<j>.pgm`` binary PGM files."""
    root = Path(root)
    for image in images:
        directory = root / f"s{image.subject_id}"
        directory.mkdir(parents=True, exist_ok=True)
        (directory / f"{image.sample_index}.pgm").write_bytes(dump_pgm(image))
    return root
