"""Input validation helpers used by the estimators and transforms."""

import numpy as np

from .exceptions import NotFittedError, ValidationError


def check_signal(x, name="signal"):
    """Return ``x`` as a finite, non-empty 1-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_matrix(X, name="X", n_features=None):
    """Return ``X`` as a finite, non-empty 2-D float64 array.

    If ``n_features`` is given the column count must match it.
    """
    try:
        arr = np.asarray(X, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not numeric: {exc}") from None
    if arr.ndim == 1:
        raise ValidationError(
            f"{name} must be two-dimensional (n_samples, n_features); "
            "reshape a single sample with X.reshape(1, -1)"
        )
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValidationError(f"{name} is empty (shape {arr.shape})")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    if n_features is not None and arr.shape[1] != n_features:
        raise ValidationError(
            f"{name} has {arr.shape[1]} features, but the model was fitted with {n_features}"
        )
    return arr


def check_labels(y, n_samples=None, name="y"):
    """Return ``y`` as a 1-D int64 array of integral class ids."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n_samples is not None and arr.shape[0] != n_samples:
        raise ValidationError(f"{name} has {arr.shape[0]} entries, expected {n_samples}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValidationError(f"{name} must contain integral class ids")
    elif arr.dtype.kind not in "iub":
        raise ValidationError(f"{name} must contain integer class ids, got dtype {arr.dtype}")
    return arr.astype(np.int64)


def check_X_y(X, y):
    X = check_matrix(X)
    y = check_labels(y, n_samples=X.shape[0])
    return X, y


def check_is_fitted(estimator, attribute="classes_"):
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first"
        )
