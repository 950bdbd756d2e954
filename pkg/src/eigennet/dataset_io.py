"""PGM decoding, the ORL directory layout and train/test/validation splits."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    ListingError,
    PgmFormatError,
    TruncationError,
)

_WHITESPACE = b" \t\n\r\x0b\x0c"


@dataclass(frozen=True)
class FaceImage:
    """A grayscale face, pixels row-major with the top-left pixel first."""

    width: int
    height: int
    pixels: np.ndarray = field(repr=False)
    subject_id: Optional[int] = None
    sample_index: Optional[int] = None

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.uint8).reshape(-1)
        if pixels.size != self.width * self.height:
            raise ValueError(
                f"{pixels.size} pixels do not fill a {self.width}x{self.height} image"
            )
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)


@dataclass(frozen=True)
class DatasetSplit:
    """Labeled raw vectors routed by sample index.

    Each part is a list of ``(vector, subject_id)`` pairs, ordered by
    ``(subject_id, sample_index)``.
    """

    train: list
    test: list
    validation: Optional[list] = None


class _HeaderReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos : self.pos + 1]
            if ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif ch in _WHITESPACE:
                self.pos += 1
            else:
                break

    def integer(self, what: str) -> int:
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            raise PgmFormatError(f"expected {what}", start)
        return int(self.data[start : self.pos])


def _rescale(values: np.ndarray, maxval: int) -> np.ndarray:
    if maxval == 255:
        return values.astype(np.uint8)
    # round-half-up of v * 255 / maxval, in exact integer arithmetic
    wide = values.astype(np.int64)
    return ((2 * 255 * wide + maxval) // (2 * maxval)).astype(np.uint8)


def load_pgm(data: bytes, subject_id=None, sample_index=None) -> FaceImage:
    """Decode a binary (P5) or ASCII (P2) PGM file.

    Samples are rescaled to ``[0, 255]`` with round-half-up whenever the
    header's maxval differs from 255.
    """
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise PgmFormatError(f"bad magic number {magic!r}", 0)
    reader = _HeaderReader(data)
    reader.pos = 2
    if reader.pos < len(data) and data[2:3] not in _WHITESPACE and data[2:3] != b"#":
        raise PgmFormatError("magic number must be followed by whitespace", 2)
    width = reader.integer("width")
    height = reader.integer("height")
    maxval_offset = reader.pos
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise PgmFormatError(f"non-positive dimensions {width}x{height}", maxval_offset)
    if not 1 <= maxval <= 65535:
        raise PgmFormatError(f"maxval {maxval} outside 1..65535", maxval_offset)

    count = width * height
    if magic == b"P5":
        if reader.pos >= len(data) or data[reader.pos : reader.pos + 1] not in _WHITESPACE:
            raise PgmFormatError("expected a single whitespace after maxval", reader.pos)
        start = reader.pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        available = (len(data) - start) // dtype.itemsize
        if available < count:
            raise TruncationError(count, available, start)
        values = np.frombuffer(data, dtype=dtype, count=count, offset=start)
    else:
        tokens = []
        while len(tokens) < count:
            reader.skip_space()
            if reader.pos >= len(data):
                raise TruncationError(count, len(tokens), reader.pos)
            tokens.append(reader.integer("pixel value"))
        values = np.array(tokens, dtype=np.int64)
    if values.size and int(values.max()) > maxval:
        raise PgmFormatError(f"sample exceeds maxval {maxval}", maxval_offset)
    return FaceImage(width, height, _rescale(values, maxval), subject_id, sample_index)


def dump_pgm(image: FaceImage, binary: bool = True) -> bytes:
    """Serialize ``image`` as P5 (default) or P2 with maxval 255."""
    header = f"{'P5' if binary else 'P2'}\n{image.width} {image.height}\n255\n".encode()
    if binary:
        return header + image.pixels.tobytes()
    rows = np.asarray(image.pixels).reshape(image.height, image.width)
    body = "\n".join(" ".join(str(v) for v in row) for row in rows)
    return header + body.encode() + b"\n"


def read_pgm(path, subject_id=None, sample_index=None) -> FaceImage:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError as exc:
        raise ListingError(path) from exc
    return load_pgm(data, subject_id, sample_index)


_SUBJECT_DIR = re.compile(r"s(\d+)$")
_SAMPLE_FILE = re.compile(r"(\d+)\.pgm$")


def scan_orl_layout(root) -> list[FaceImage]:
    """Load every ``<root>/s<k>/<j>.pgm`` image, sorted by (subject, sample).

    The expected layout is the rectangle of subjects ``1..max k`` by samples
    ``1..max j`` observed anywhere in the tree; any hole in it raises
    :class:`ListingError` naming the missing path.
    """
    root = Path(root)
    if not root.is_dir():
        raise ListingError(root)
    subjects = {}
    for entry in root.iterdir():
        match = _SUBJECT_DIR.match(entry.name)
        if match and entry.is_dir():
            samples = [
                int(m.group(1))
                for m in (_SAMPLE_FILE.match(f.name) for f in entry.iterdir())
                if m
            ]
            subjects[int(match.group(1))] = set(samples)
    if not subjects:
        raise ListingError(root / "s1")
    n_subjects = max(subjects)
    n_samples = max((max(s) for s in subjects.values() if s), default=1)

    images = []
    for k in range(1, n_subjects + 1):
        if k not in subjects:
            raise ListingError(root / f"s{k}")
        for j in range(1, n_samples + 1):
            path = root / f"s{k}" / f"{j}.pgm"
            if j not in subjects[k]:
                raise ListingError(path)
            images.append(read_pgm(path, subject_id=k, sample_index=j))

    first = images[0]
    for image in images:
        if (image.width, image.height) != (first.width, first.height):
            raise DimensionMismatchError(
                f"s{image.subject_id}/{image.sample_index}.pgm is "
                f"{image.width}x{image.height}, expected {first.width}x{first.height}"
            )
    return images


def vectorize(image: FaceImage) -> np.ndarray:
    """Row-major raw intensities as float64; no normalization."""
    return image.pixels.astype(np.float64)


def unvectorize(values, width: int, height: int) -> np.ndarray:
    """Inverse of :func:`vectorize`: a ``(height, width)`` array."""
    return np.asarray(values).reshape(height, width)


def parse_index_set(text: str) -> frozenset:
    """Parse ``"1-5"``, ``"1,3,7-9"`` or ``""`` into a set of sample indices."""
    indices = set()
    for part in filter(None, (p.strip() for p in text.split(","))):
        lo, sep, hi = part.partition("-")
        try:
            if sep:
                indices.update(range(int(lo), int(hi) + 1))
            else:
                indices.add(int(lo))
        except ValueError:
            raise ConfigurationError(f"bad sample index range {part!r}") from None
    return frozenset(indices)


def make_split(
    images: Sequence[FaceImage],
    train_samples: Iterable[int],
    test_samples: Iterable[int],
    validation_samples: Optional[Iterable[int]] = None,
) -> DatasetSplit:
    train_set, test_set = frozenset(train_samples), frozenset(test_samples)
    val_set = frozenset(validation_samples) if validation_samples is not None else None
    named = [("train", train_set), ("test", test_set)]
    if val_set is not None:
        named.append(("validation", val_set))
    for i, (name_a, a) in enumerate(named):
        for name_b, b in named[i + 1 :]:
            if a & b:
                raise ConfigurationError(
                    f"{name_a} and {name_b} samples overlap: {sorted(a & b)}"
                )

    parts = {name: [] for name, _ in named}
    ordered = sorted(images, key=lambda im: (im.subject_id, im.sample_index))
    for image in ordered:
        for name, indices in named:
            if image.sample_index in indices:
                parts[name].append((vectorize(image), image.subject_id))

    train_subjects = {sid for _, sid in parts["train"]}
    unseen = {sid for _, sid in parts["test"]} - train_subjects
    if unseen:
        raise ConfigurationError(f"test subjects absent from training: {sorted(unseen)}")
    return DatasetSplit(parts["train"], parts["test"], parts.get("validation"))
