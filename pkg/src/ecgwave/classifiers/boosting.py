import math

import numpy as np

from ..exceptions import ValidationError
from ._base import BaseClassifier, one_hot, softmax
from ._tree import grow_classification_tree, grow_tree, mse_score, presort


class GradientBoostingClassifier(BaseClassifier):
    """Multiclass gradient boosting on the softmax (multinomial deviance) loss.

    Each stage fits one regression tree per class to the residuals
    ``onehot - softmax(F)``, splitting on squared error. A leaf's value is
    the one-step Newton estimate ``(K - 1) / K * sum(r) / sum(p * (1 - p))``,
    and it is added to ``F`` after scaling by ``learning_rate``. ``F`` starts
    at the log class priors.

    Runs of 10000 stages are possible but slow; the default of 300 keeps
    desk runs short.
    """

    kind = "gradient_boost"

    def __init__(self, n_estimators=300, learning_rate=0.1, max_depth=3):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth

    def _fit(self, X, y_idx):
        if int(self.n_estimators) != self.n_estimators or self.n_estimators < 1:
            raise ValidationError(f"n_estimators must be a positive integer, got {self.n_estimators!r}")
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate!r}")
        k = self.n_classes_
        Y = one_hot(y_idx, k)
        prior = Y.mean(axis=0)
        self.init_ = np.log(prior)
        raw = np.tile(self.init_, (X.shape[0], 1))
        stats = np.ones((X.shape[0], 2))
        factor = (k - 1) / k
        order = presort(X)
        self.estimators_ = []
        for _ in range(self.n_estimators):
            P = softmax(raw)
            stage = []
            for c in range(k):
                r = Y[:, c] - P[:, c]
                hess = P[:, c] * (1.0 - P[:, c])
                stats[:, 1] = r

                def leaf_value(idx, r=r, hess=hess):
                    den = hess[idx].sum()
                    return [0.0 if den < 1e-150 else factor * r[idx].sum() / den]

                def is_pure(idx, r=r):
                    return np.ptp(r[idx]) == 0

                tree = grow_tree(X, stats, mse_score, leaf_value, is_pure, self.max_depth,
                                 presorted=order)
                raw[:, c] += self.learning_rate * tree.predict_value(X)[:, 0]
                stage.append(tree)
            self.estimators_.append(stage)

    def decision_function(self, X):
        return self._raw(self._check_predict(X))

    def _raw(self, X):
        raw = np.tile(self.init_, (X.shape[0], 1))
        for stage in self.estimators_:
            for c, tree in enumerate(stage):
                raw[:, c] += self.learning_rate * tree.predict_value(X)[:, 0]
        return raw

    def _predict_proba(self, X):
        return softmax(self._raw(X))


_CHANCE_SLACK = 1e-12


class AdaBoostClassifier(BaseClassifier):
    """SAMME boosting of depth-1 Gini stumps.

    Stage weight is ``log((1 - err) / err) + log(K - 1)``. A stump whose
    weighted error reaches ``1 - 1/K`` is no better than chance: it is
    discarded and boosting stops, since the sample weights would not
    change. A stump with zero error gets weight 1 and also ends boosting.

    The chance comparison allows ``1e-12`` of slack: after reweighting, a
    stump that is exactly at chance can come out a rounding error below
    ``1 - 1/K`` and would otherwise be kept with a weight of ~1e-16.
    """

    kind = "adaboost"

    def __init__(self, n_estimators=100):
        self.n_estimators = n_estimators

    def _fit(self, X, y_idx):
        if int(self.n_estimators) != self.n_estimators or self.n_estimators < 1:
            raise ValidationError(f"n_estimators must be a positive integer, got {self.n_estimators!r}")
        k = self.n_classes_
        n = X.shape[0]
        w = np.full(n, 1.0 / n)
        self.estimators_, self.estimator_weights_, self.estimator_errors_ = [], [], []
        self.rejected_stages_ = 0
        order = presort(X)
        for _ in range(self.n_estimators):
            stump = grow_classification_tree(X, y_idx, k, sample_weight=w, max_depth=1,
                                             presorted=order)
            miss = np.argmax(stump.predict_value(X), axis=1) != y_idx
            err = float(w[miss].sum() / w.sum())
            if err >= 1.0 - 1.0 / k - _CHANCE_SLACK:
                self.rejected_stages_ += 1
                break
            if err <= 0.0:
                self.estimators_.append(stump)
                self.estimator_weights_.append(1.0)
                self.estimator_errors_.append(0.0)
                break
            alpha = math.log((1.0 - err) / err) + math.log(k - 1)
            self.estimators_.append(stump)
            self.estimator_weights_.append(alpha)
            self.estimator_errors_.append(err)
            w = w * np.exp(alpha * miss)
            w /= w.sum()
        if not self.estimators_:
            raise ValidationError("AdaBoost: the first stump is no better than chance")
        self.estimator_weights_ = np.asarray(self.estimator_weights_)
        self.estimator_errors_ = np.asarray(self.estimator_errors_)

    def decision_function(self, X):
        return self._scores(self._check_predict(X))

    def _scores(self, X):
        scores = np.zeros((X.shape[0], self.n_classes_))
        rows = np.arange(X.shape[0])
        for stump, alpha in zip(self.estimators_, self.estimator_weights_):
            scores[rows, np.argmax(stump.predict_value(X), axis=1)] += alpha
        return scores

    def _predict_proba(self, X):
        return self._scores(X) / self.estimator_weights_.sum()
