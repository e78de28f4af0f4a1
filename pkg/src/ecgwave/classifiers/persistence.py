"""JSON model container.

Layout::

    {"magic": "ecgwave-model", "format_version": 1,
     "spec": {"kind": ..., "params": {...}, "seed": ...},
     "n_features_in": ..., "state": {<fitted attributes>}}

Floats are written with ``repr`` precision by :mod:`json`, so a reloaded
model predicts bit-identically.
"""

import json
from pathlib import Path

import numpy as np

from ..exceptions import ModelFormatError, ModelVersionError, ValidationError
from ._tree import Tree

MAGIC = "ecgwave-model"
FORMAT_VERSION = 1


def _encode(obj):
    if isinstance(obj, Tree):
        return {"__tree__": obj.to_dict()}
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": obj.dtype.str, "shape": list(obj.shape)}
    if isinstance(obj, (list, tuple)):
        return [_encode(o) for o in obj]
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__tree__" in obj:
            return Tree.from_dict(obj["__tree__"])
        if "__ndarray__" in obj:
            return np.asarray(obj["__ndarray__"], dtype=np.dtype(obj["dtype"])).reshape(obj["shape"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(o) for o in obj]
    return obj


def _fitted_state(model):
    return {k: v for k, v in vars(model).items() if k.endswith("_") and not k.startswith("_")}


def save_model(model, path, seed=None):
    """Write a fitted classifier to ``path``."""
    from . import ModelSpec

    spec = ModelSpec.from_estimator(model, seed=seed)
    doc = {
        "magic": MAGIC,
        "format_version": FORMAT_VERSION,
        "spec": spec.to_dict(),
        "n_features_in": int(model.n_features_in_),
        "state": _encode(_fitted_state(model)),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, allow_nan=False))
    return path


def load_model(path, n_features=None):
    """Read a model written by :func:`save_model`.

    ``n_features``, when given, must equal the width the model was fitted on.
    """
    from . import ModelSpec, make_estimator

    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: not a readable model file ({exc})") from None
    if not isinstance(doc, dict) or doc.get("magic") != MAGIC:
        raise ModelFormatError(f"{path}: missing model header")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f"{path}: model format version {version!r} is not supported (expected {FORMAT_VERSION})"
        )
    try:
        spec = ModelSpec.from_dict(doc["spec"])
        model = make_estimator(spec)
        for key, value in _decode(doc["state"]).items():
            setattr(model, key, value)
        width = int(doc["n_features_in"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: corrupt model state ({exc})") from None
    if model.n_features_in_ != width:
        raise ModelFormatError(f"{path}: feature width mismatch inside the file")
    if n_features is not None and width != n_features:
        raise ValidationError(f"{path}: model expects {width} features, data has {n_features}")
    return model
