import math

import numpy as np

from ..exceptions import ValidationError
from ._base import BaseClassifier, softmax


class LinearSVC(BaseClassifier):
    """One-vs-rest linear SVM trained by stochastic subgradient descent.

    Minimizes ``l2 / 2 * |w|^2 + mean(max(0, 1 - y * (w.x + b)))`` per class,
    all classes updated together, one shuffled pass over the data per epoch.
    The step size follows ``1 / (l2 * (t0 + t))`` with ``t0`` chosen so the
    first step has the size of a typical weight (``l2 ** -0.25``). With
    ``averaged`` the returned model is the running mean of the iterates
    from the second epoch on (the whole run if ``epochs == 1``).
    """

    kind = "linear_svc"

    def __init__(self, l2=1e-4, epochs=20, averaged=True, random_state=0):
        self.l2 = l2
        self.epochs = epochs
        self.averaged = averaged
        self.random_state = random_state

    def _fit(self, X, y_idx):
        if not self.l2 > 0:
            raise ValidationError(f"l2 must be > 0, got {self.l2!r}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValidationError(f"epochs must be a positive integer, got {self.epochs!r}")
        n, n_feat = X.shape
        k = self.n_classes_
        sign = np.where(np.arange(k)[None, :] == y_idx[:, None], 1.0, -1.0)
        lam = float(self.l2)
        eta0 = math.sqrt(1.0 / math.sqrt(lam))
        t0 = 1.0 / (lam * eta0)

        rng = np.random.default_rng(self.random_state)
        W = np.zeros((k, n_feat))
        b = np.zeros(k)
        W_avg, b_avg = W.copy(), b.copy()
        n_avg = 0
        avg_from = 1 if self.epochs > 1 else 0
        t = 0
        for epoch in range(self.epochs):
            for i in rng.permutation(n):
                x, s = X[i], sign[i]
                eta = 1.0 / (lam * (t0 + t))
                viol = s * (W @ x + b) < 1.0
                W *= 1.0 - eta * lam
                if viol.any():
                    W[viol] += (eta * s[viol])[:, None] * x
                    b[viol] += eta * s[viol]
                t += 1
                if self.averaged and epoch >= avg_from:
                    n_avg += 1
                    W_avg += (W - W_avg) / n_avg
                    b_avg += (b - b_avg) / n_avg
        if self.averaged:
            W, b = W_avg, b_avg
        self.coef_ = W
        self.intercept_ = b
        self.n_iter_ = t

    def decision_function(self, X):
        X = self._check_predict(X)
        return X @ self.coef_.T + self.intercept_

    def _predict_proba(self, X):
        # Not calibrated: a softmax over the one-vs-rest margins.
        return softmax(X @ self.coef_.T + self.intercept_)
