"""Beat datasets: CSV ingestion, stratified splitting and synthetic fixtures.

The on-disk format is the headerless Kaggle MIT-BIH layout: every line holds
``BEAT_LENGTH`` amplitudes followed by the class label written as a real
number (``"0.0"`` ... ``"4.0"``).
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ValidationError

BEAT_LENGTH = 187
N_CLASSES = 5
CLASS_NAMES = ("N", "S", "V", "F", "Q")

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    Used for every shuffle in this module so that a given seed produces the
    same split in any language that implements the same 20-line algorithm.
    """

    def __init__(self, seed):
        self.state = int(seed) & _MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def shuffle(self, items):
        """In-place Fisher-Yates, walking i = n-1 .. 1, j = next_u64() % (i + 1)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
        return items


@dataclass(frozen=True, eq=False)
class BeatRecord:
    samples: np.ndarray
    label: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValidationError("beat samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("beat samples must be finite")
        label = int(self.label)
        if label != self.label or not 0 <= label < N_CLASSES:
            raise ValidationError(f"label must be an integer in 0..{N_CLASSES - 1}, got {self.label!r}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "label", label)

    def __eq__(self, other):
        if not isinstance(other, BeatRecord):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable, ordered collection of equal-length beats.

    ``samples`` has shape ``(n_records, beat_length)`` and ``labels`` shape
    ``(n_records,)``. Both arrays are made read-only on construction.
    """

    samples: np.ndarray
    labels: np.ndarray
    counts: np.ndarray = field(init=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        labels = np.array(self.labels, copy=True)
        if samples.ndim == 1 and samples.size == 0:
            samples = samples.reshape(0, BEAT_LENGTH)
        if samples.ndim != 2:
            raise ValidationError(f"samples must be 2-D, got shape {samples.shape}")
        if labels.shape != (samples.shape[0],):
            raise ValidationError("labels must hold one entry per record")
        if labels.size and labels.dtype.kind == "f" and np.any(labels != np.round(labels)):
            raise ValidationError("labels must be integral")
        labels = labels.astype(np.int64)
        if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise ValidationError(f"labels must lie in 0..{N_CLASSES - 1}")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("samples must be finite")
        samples.setflags(write=False)
        labels.setflags(write=False)
        counts = np.bincount(labels, minlength=N_CLASSES)
        counts.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_records(cls, records, beat_length=BEAT_LENGTH):
        records = list(records)
        if not records:
            return cls(np.zeros((0, beat_length)), np.zeros(0, dtype=np.int64))
        return cls(np.stack([r.samples for r in records]), [r.label for r in records])

    @property
    def beat_length(self):
        return self.samples.shape[1]

    def __len__(self):
        return self.samples.shape[0]

    def __getitem__(self, i):
        return BeatRecord(self.samples[i], int(self.labels[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.samples, other.samples) and np.array_equal(
            self.labels, other.labels
        )

    __hash__ = None

    def take(self, indices):
        """Return a new dataset holding the records at ``indices``, in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.samples[indices], self.labels[indices])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed!r}")


def load_csv(path, beat_length=BEAT_LENGTH):
    """Read a headerless beat CSV into a :class:`Dataset`.

    Every non-empty line must hold ``beat_length + 1`` numeric fields; the
    last is the class label. Trailing blank lines are ignored, blank lines
    anywhere else are rejected. Errors carry the 1-based line number.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    except UnicodeDecodeError as exc:
        raise ParseError(f"file is not valid UTF-8 ({exc})", path=path) from None

    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()

    n_fields = beat_length + 1
    rows = np.empty((len(lines), n_fields), dtype=np.float64)
    for lineno, line in enumerate(lines, start=1):
        fields = line.split(",")
        if len(fields) != n_fields:
            raise ParseError(f"expected {n_fields} fields, found {len(fields)}", lineno, path)
        try:
            rows[lineno - 1] = np.array(fields, dtype=np.float64)
        except ValueError:
            bad = next(f for f in fields if not _is_float(f))
            raise ParseError(f"non-numeric field {bad.strip()!r}", lineno, path) from None

    amplitudes, labels = rows[:, :beat_length], rows[:, beat_length]
    bad_rows = np.flatnonzero(~np.isfinite(amplitudes).all(axis=1))
    if bad_rows.size:
        raise ParseError("non-finite amplitude", int(bad_rows[0]) + 1, path)
    bad_labels = np.flatnonzero(
        ~np.isfinite(labels) | (labels != np.round(labels)) | (labels < 0) | (labels >= N_CLASSES)
    )
    if bad_labels.size:
        i = int(bad_labels[0])
        raise ParseError(
            f"label {lines[i].split(',')[-1].strip()!r} is not an integer in 0..{N_CLASSES - 1}",
            i + 1,
            path,
        )
    return Dataset(amplitudes, labels.astype(np.int64))


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def write_csv(ds, path):
    """Write ``ds`` in the loader's format; values are written with ``repr`` so reloading is exact."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row, label in zip(ds.samples.tolist(), ds.labels.tolist()):
            fh.write(",".join(map(repr, row)))
            fh.write(f",{float(label)!r}\n")
    return path


def class_histogram(ds):
    """Per-class record counts as a length-``N_CLASSES`` integer array."""
    return np.bincount(np.asarray(ds.labels, dtype=np.int64), minlength=N_CLASSES)


def train_count(n, fraction):
    """Records of an ``n``-record class that go to the training side.

    ``floor(fraction * n + 0.5)`` (round half up), clamped to ``[1, n - 1]``
    so that both sides keep every class.
    """
    return min(max(math.floor(fraction * n + 0.5), 1), n - 1)


def stratified_split(ds, spec):
    """Split ``ds`` per class into train/test according to ``spec``.

    Classes are processed in ascending label order with a single
    :class:`SplitMix64` stream seeded by ``spec.seed``. The indices of each
    class (in file order) are shuffled and the first :func:`train_count`
    of them go to train. Both outputs keep the original record order.
    """
    counts = class_histogram(ds)
    present = np.flatnonzero(counts)
    if present.size == 0:
        raise ValidationError("cannot split an empty dataset")
    thin = [int(c) for c in present if counts[c] < 2]
    if thin:
        raise ValidationError(f"classes {thin} have fewer than 2 records; cannot split")

    rng = SplitMix64(spec.seed)
    train_idx = []
    for c in present:
        members = np.flatnonzero(ds.labels == c).tolist()
        rng.shuffle(members)
        train_idx.extend(members[: train_count(len(members), spec.train_fraction)])
    mask = np.zeros(len(ds), dtype=bool)
    mask[train_idx] = True
    return ds.take(np.flatnonzero(mask)), ds.take(np.flatnonzero(~mask))


def stratified_subsample(ds, n, seed=0):
    """Seeded class-proportional subsample of roughly ``n`` records.

    Equivalent to the training side of a stratified split with fraction
    ``n / len(ds)``; returns ``ds`` unchanged when ``n >= len(ds)``.
    """
    if n < 1:
        raise ValidationError(f"subset size must be >= 1, got {n}")
    if n >= len(ds):
        return ds
    train, _ = stratified_split(ds, SplitSpec(n / len(ds), seed))
    return train


def write_split(train, test, spec, out_dir):
    """Write ``train.csv``, ``test.csv`` and ``split_manifest.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(train, out_dir / "train.csv")
    write_csv(test, out_dir / "test.csv")
    manifest = {
        "seed": spec.seed,
        "train_fraction": spec.train_fraction,
        "rounding": "floor(fraction * n_class + 0.5), clamped to [1, n_class - 1]",
        "shuffle": "splitmix64 fisher-yates, classes in ascending order",
        "train_counts": class_histogram(train).tolist(),
        "test_counts": class_histogram(test).tolist(),
    }
    (out_dir / "split_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def _archetype(label, t, rng):
    """Noise-free template for one synthetic class, with seeded jitter."""

    def bump(center, width, height):
        return height * np.exp(-0.5 * ((t - center) / width) ** 2)

    shift = rng.uniform(-0.01, 0.01)
    if label == 0:
        # narrow R peak, small T wave
        return bump(0.25 + shift, 0.012, 0.9) + bump(0.55 + shift, 0.05, 0.25)
    if label == 1:
        # early, wide peak
        return bump(0.12 + shift, 0.04, 0.7) + bump(0.4 + shift, 0.06, 0.15)
    if label == 2:
        # slow oscillation riding on a broad complex
        return 0.35 + 0.25 * np.sin(2 * np.pi * 3 * (t + shift)) + bump(0.3, 0.08, 0.3)
    if label == 3:
        # fast oscillation burst
        env = bump(0.5 + shift, 0.12, 1.0)
        return 0.4 + 0.35 * env * np.sin(2 * np.pi * 25 * t)
    # flat with a late ramp
    return np.clip((t - 0.6 - shift) * 2.0, 0, 0.8) + 0.05


def synth_beats(n_per_class, seed=0, beat_length=BEAT_LENGTH, noise=0.01):
    """Deterministic synthetic fixture with five well-separated beat shapes.

    Each class is a distinct mixture of Gaussian bumps, oscillations and
    ramps; records add small seeded amplitude jitter and Gaussian noise.
    Values are clipped to ``[0, 1]`` like the normalized Kaggle beats.
    """
    if n_per_class < 1:
        raise ValidationError(f"n_per_class must be >= 1, got {n_per_class}")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, beat_length)
    samples, labels = [], []
    for label in range(N_CLASSES):
        for _ in range(n_per_class):
            beat = _archetype(label, t, rng) * rng.uniform(0.9, 1.1)
            beat = beat + rng.normal(0.0, noise, beat_length)
            samples.append(np.clip(beat, 0.0, 1.0))
            labels.append(label)
    return Dataset(np.asarray(samples), np.asarray(labels))
