import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .._validation import check_is_fitted, check_matrix, check_X_y
from ..exceptions import ValidationError


class BaseClassifier(ClassifierMixin, BaseEstimator):
    """Shared fit/predict plumbing.

    Subclasses implement ``_fit(X, y_idx)`` on labels re-coded to
    ``0 .. n_classes - 1`` and ``_predict_proba(X)``. ``predict`` takes the
    arg-max of the scores, so equal scores resolve to the smallest class id.
    After ``fit`` the estimator exposes ``classes_``, ``n_features_in_`` and
    ``training_accuracy_``.
    """

    kind = None

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        classes, y_idx = np.unique(y, return_inverse=True)
        if classes.size < 2:
            raise ValidationError(
                f"need at least two classes to fit {type(self).__name__}, got {classes.tolist()}"
            )
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        self._fit(X, y_idx.reshape(-1))
        self.training_accuracy_ = float(np.mean(self.predict(X) == y))
        return self

    def _check_predict(self, X):
        check_is_fitted(self)
        return check_matrix(X, n_features=self.n_features_in_)

    def predict_proba(self, X):
        return self._predict_proba(self._check_predict(X))

    def predict(self, X):
        X = self._check_predict(X)
        return self.classes_[self._predict_indices(X)]

    def _predict_indices(self, X):
        return np.argmax(self._predict_proba(X), axis=1)

    @property
    def n_classes_(self):
        return self.classes_.shape[0]


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def one_hot(y_idx, n_classes):
    out = np.zeros((y_idx.shape[0], n_classes))
    out[np.arange(y_idx.shape[0]), y_idx] = 1.0
    return out
