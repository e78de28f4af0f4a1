"""Statistical summaries of wavelet sub-bands.

Each band contributes eight statistics, in this order:

``mean, median, std, var, rms, zcr, mcr, entropy``

* ``std`` / ``var`` use the population (``n``) denominator.
* ``zcr`` counts sign changes between neighbours divided by ``n - 1``,
  with zero counted as positive; ``mcr`` is the ``zcr`` of the
  mean-removed band. Both are 0 for single-coefficient bands.
* ``entropy`` is the Shannon entropy (nats) of the energy distribution
  ``p_i = c_i**2 / sum(c**2)``, with ``0 ln 0 = 0`` and 0 for an all-zero band.

A beat's feature vector concatenates the band statistics band-major, bands
ordered ``[a_L, d_L, ..., d_1]``.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_matrix, check_signal
from .exceptions import ValidationError
from .wavelets import band_names, make_wavelet, wavedec_rows

STATISTICS = ("mean", "median", "std", "var", "rms", "zcr", "mcr", "entropy")
N_STATISTICS = len(STATISTICS)


@dataclass(frozen=True)
class FeatureConfig:
    """Feature-extraction settings.

    ``bands="all"`` summarizes every band of a depth-``depth`` decomposition
    (``8 * (depth + 1)`` features). ``bands="details"`` keeps only the detail
    bands (``8 * depth`` features), e.g. depth 5 for five detail bands.
    """

    wavelet: str = "sym5"
    depth: int = 4
    bands: str = "all"
    entropy: str = "shannon-energy-nats"
    crossing: str = "zero-counts-positive"

    def __post_init__(self):
        make_wavelet(self.wavelet)
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValidationError(f"depth must be a positive integer, got {self.depth!r}")
        if self.bands not in ("all", "details"):
            raise ValidationError(f"bands must be 'all' or 'details', got {self.bands!r}")
        if self.entropy != "shannon-energy-nats":
            raise ValidationError(f"unsupported entropy definition {self.entropy!r}")
        if self.crossing != "zero-counts-positive":
            raise ValidationError(f"unsupported crossing convention {self.crossing!r}")

    @property
    def band_names(self):
        names = band_names(self.depth)
        return names if self.bands == "all" else names[1:]

    @property
    def n_features(self):
        return N_STATISTICS * len(self.band_names)


def feature_names(cfg=None):
    cfg = cfg or FeatureConfig()
    return [f"{band}_{stat}" for band in cfg.band_names for stat in STATISTICS]


def _crossing_rate(c):
    n = c.shape[-1]
    if n < 2:
        return np.zeros(c.shape[:-1])
    positive = c >= 0
    return np.count_nonzero(positive[..., 1:] != positive[..., :-1], axis=-1) / (n - 1)


def _band_stats(c):
    """Statistics along the last axis; returns shape ``c.shape[:-1] + (8,)``."""
    mean = c.mean(axis=-1)
    centered = c - mean[..., None]
    var = (centered**2).mean(axis=-1)
    energy = (c**2).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = c**2 / energy[..., None]
        plogp = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    entropy = np.where(energy > 0, -plogp.sum(axis=-1), 0.0)
    return np.stack(
        [
            mean,
            np.median(c, axis=-1),
            np.sqrt(var),
            var,
            np.sqrt(energy / c.shape[-1]),
            _crossing_rate(c),
            _crossing_rate(centered),
            entropy,
        ],
        axis=-1,
    )


def band_features(coeffs):
    """Eight summary statistics of one coefficient band, in ``STATISTICS`` order."""
    c = check_signal(coeffs, "coeffs")
    return _band_stats(c)


def extract_matrix(beats, cfg=None):
    """Feature matrix for a 2-D array of equal-length beats (one row each)."""
    cfg = cfg or FeatureConfig()
    beats = np.asarray(beats, dtype=np.float64)
    if beats.ndim != 2:
        raise ValidationError(f"beats must be a 2-D array, got shape {beats.shape}")
    if beats.shape[0] == 0:
        return np.zeros((0, cfg.n_features))
    if not np.all(np.isfinite(beats)):
        raise ValidationError("beats contain non-finite values")
    bands = wavedec_rows(beats, cfg.wavelet, cfg.depth)
    if cfg.bands == "details":
        bands = bands[1:]
    return np.concatenate([_band_stats(b) for b in bands], axis=1)


def extract(beat, cfg=None):
    """Feature vector of one beat (a :class:`~ecgwave.data.BeatRecord` or an array)."""
    samples = getattr(beat, "samples", beat)
    x = check_signal(samples, "beat")
    return extract_matrix(x[None, :], cfg)[0]


def extract_dataset(ds, cfg=None):
    """Return ``(X, y)`` for a :class:`~ecgwave.data.Dataset`; row ``i`` is record ``i``."""
    return extract_matrix(ds.samples, cfg), np.asarray(ds.labels).copy()


class WaveletFeatures(TransformerMixin, BaseEstimator):
    """Transformer mapping raw beats to sub-band statistics.

    Stateless: ``fit`` only validates the configuration and records the
    expected beat length.
    """

    def __init__(self, wavelet="sym5", depth=4, bands="all"):
        self.wavelet = wavelet
        self.depth = depth
        self.bands = bands

    def _config(self):
        return FeatureConfig(self.wavelet, self.depth, self.bands)

    def fit(self, X, y=None):
        X = check_matrix(X)
        self.config_ = self._config()
        self.n_features_in_ = X.shape[1]
        self.feature_names_ = feature_names(self.config_)
        return self

    def transform(self, X):
        X = check_matrix(X, n_features=getattr(self, "n_features_in_", None))
        return extract_matrix(X, self._config())

    def get_feature_names_out(self, input_features=None):
        return np.asarray(feature_names(self._config()), dtype=object)


def standardize_fit(X):
    """Per-column ``(mean, std)`` with the population denominator."""
    X = check_matrix(X)
    return X.mean(axis=0), X.std(axis=0)


def standardize_apply(X, params):
    """Center and scale columns; zero-variance columns are passed through untouched."""
    mean, std = params
    X = np.asarray(X, dtype=np.float64)
    keep = std == 0
    out = (X - mean) / np.where(keep, 1.0, std)
    out[:, keep] = X[:, keep]
    return out


class Standardizer(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        self.mean_, self.scale_ = standardize_fit(X)
        self.n_features_in_ = self.mean_.shape[0]
        return self

    def transform(self, X):
        X = check_matrix(X, n_features=self.n_features_in_)
        return standardize_apply(X, (self.mean_, self.scale_))


def export_features(X, y, path, cfg=None, standardization=None):
    """Write a headered feature CSV and ``<stem>.manifest.json`` beside it."""
    cfg = cfg or FeatureConfig()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = feature_names(cfg)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names + ["label"]) + "\n")
        for row, label in zip(np.asarray(X).tolist(), np.asarray(y).tolist()):
            fh.write(",".join(map(repr, row)) + f",{int(label)}\n")
    manifest = {
        "config": asdict(cfg),
        "n_rows": int(np.asarray(X).shape[0]),
        "columns": names,
        "statistics": {
            "std": "population (n denominator)",
            "zcr": "sign changes / (n - 1), zero counts as positive",
            "mcr": "zcr of the mean-removed band",
            "entropy": "-sum p ln p, p = c^2 / sum c^2",
        },
    }
    if standardization is not None:
        mean, std = standardization
        manifest["standardization"] = {"mean": list(map(float, mean)), "std": list(map(float, std))}
    manifest_path = path.with_name(path.stem + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path, manifest_path


def load_features(path):
    """Read a CSV written by :func:`export_features`; returns ``(X, y, names)``."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if not header or header[-1] != "label":
        raise ValidationError(f"{path}: last column must be 'label'")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, :-1], data[:, -1].astype(np.int64), header[:-1]
