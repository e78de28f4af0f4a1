import numpy as np

from ._base import BaseClassifier, softmax


class GaussianNB(BaseClassifier):
    """Gaussian naive Bayes with per-class means and variances.

    Every variance is inflated by ``var_smoothing`` times the largest
    feature variance of the training set.
    """

    kind = "gaussian_nb"

    def __init__(self, var_smoothing=1e-9):
        self.var_smoothing = var_smoothing

    def _fit(self, X, y_idx):
        k = self.n_classes_
        eps = self.var_smoothing * X.var(axis=0).max()
        if eps == 0:
            eps = self.var_smoothing
        self.epsilon_ = float(eps)
        self.class_count_ = np.bincount(y_idx, minlength=k).astype(np.float64)
        self.class_prior_ = self.class_count_ / self.class_count_.sum()
        self.theta_ = np.vstack([X[y_idx == c].mean(axis=0) for c in range(k)])
        self.var_ = np.vstack([X[y_idx == c].var(axis=0) for c in range(k)]) + eps

    def joint_log_likelihood(self, X):
        X = self._check_predict(X)
        return self._jll(X)

    def _jll(self, X):
        log_norm = -0.5 * np.log(2.0 * np.pi * self.var_).sum(axis=1)
        sq = ((X[:, None, :] - self.theta_[None]) ** 2 / self.var_[None]).sum(axis=2)
        return np.log(self.class_prior_) + log_norm - 0.5 * sq

    def _predict_proba(self, X):
        return softmax(self._jll(X))

    def _predict_indices(self, X):
        return np.argmax(self._jll(X), axis=1)
