"""From-scratch classifiers behind a uniform, sklearn-compatible interface.

Every estimator follows the scikit-learn protocol (``fit``/``predict``/
``predict_proba``, ``get_params``/``set_params``) and can be dropped into a
``sklearn.pipeline.Pipeline``. :class:`ModelSpec` adds a serializable
``(kind, params, seed)`` description. Defaults: knn k=5, p=1; decision
trees and forests max_depth=20 (forests: 10 trees, 5 candidate features
per split); mlp (50, 100) tanh units, alpha=0.01, 1000 epochs.
"""

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import SpecError
from .boosting import AdaBoostClassifier, GradientBoostingClassifier
from .linear import LinearSVC
from .mlp import MLPClassifier, mlp_gradient_check
from .naive_bayes import GaussianNB
from .neighbors import KNNClassifier
from .persistence import load_model, save_model
from .tree import DecisionTreeClassifier, RandomForestClassifier

ESTIMATORS = {
    cls.kind: cls
    for cls in (
        KNNClassifier,
        GaussianNB,
        DecisionTreeClassifier,
        RandomForestClassifier,
        GradientBoostingClassifier,
        LinearSVC,
        AdaBoostClassifier,
        MLPClassifier,
    )
}
KINDS = tuple(ESTIMATORS)

# Kinds whose standardized-feature default is on (distance, margin and
# gradient based learners).
SCALE_SENSITIVE = frozenset({"knn", "linear_svc", "mlp"})


def _hyperparameters(kind):
    names = ESTIMATORS[kind]().get_params()
    names.pop("random_state", None)
    return names


@dataclass(frozen=True)
class ModelSpec:
    """``kind`` plus hyperparameter overrides and the seed.

    Unknown kinds or hyperparameter names raise :class:`SpecError`.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ESTIMATORS:
            raise SpecError(f"unknown classifier kind {self.kind!r}; choose from {', '.join(KINDS)}")
        known = _hyperparameters(self.kind)
        unknown = sorted(set(self.params) - set(known))
        if unknown:
            raise SpecError(
                f"{self.kind}: unrecognized hyperparameter(s) {unknown}; known: {sorted(known)}"
            )
        if int(self.seed) != self.seed or self.seed < 0:
            raise SpecError(f"seed must be a non-negative integer, got {self.seed!r}")

    def resolved_params(self):
        """Defaults merged with overrides."""
        params = _hyperparameters(self.kind)
        params.update(self.params)
        return params

    def to_dict(self):
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.resolved_params().items()}
        return {"kind": self.kind, "params": params, "seed": int(self.seed)}

    @classmethod
    def from_dict(cls, d):
        params = dict(d.get("params", {}))
        if "hidden" in params:
            params["hidden"] = tuple(params["hidden"])
        return cls(d["kind"], params, int(d.get("seed", 0)))

    @classmethod
    def from_estimator(cls, est, seed=None):
        params = est.get_params()
        state = params.pop("random_state", None)
        if seed is None:
            seed = state if state is not None else 0
        return cls(est.kind, params, seed)


def make_estimator(spec):
    """Unfitted estimator for ``spec``."""
    cls = ESTIMATORS[spec.kind]
    params = spec.resolved_params()
    if "random_state" in cls().get_params():
        params["random_state"] = spec.seed
    return cls(**params)


@dataclass(frozen=True, eq=False)
class PredictionBatch:
    labels: np.ndarray
    scores: np.ndarray = None


def fit(spec, X, y):
    """Fit the estimator described by ``spec``; training accuracy is in ``training_accuracy_``."""
    return make_estimator(spec).fit(X, y)


def predict(model, X, with_scores=True):
    labels = model.predict(X)
    scores = model.predict_proba(X) if with_scores else None
    return PredictionBatch(labels, scores)


__all__ = [
    "AdaBoostClassifier",
    "DecisionTreeClassifier",
    "ESTIMATORS",
    "GaussianNB",
    "GradientBoostingClassifier",
    "KINDS",
    "KNNClassifier",
    "LinearSVC",
    "MLPClassifier",
    "ModelSpec",
    "PredictionBatch",
    "RandomForestClassifier",
    "SCALE_SENSITIVE",
    "fit",
    "load_model",
    "make_estimator",
    "mlp_gradient_check",
    "predict",
    "save_model",
]
