import numpy as np

from ..exceptions import ValidationError
from ._base import BaseClassifier
from ._tree import grow_classification_tree, presort


def _check_depth(max_depth):
    if max_depth is not None and (int(max_depth) != max_depth or max_depth < 1):
        raise ValidationError(f"max_depth must be a positive integer or None, got {max_depth!r}")


class DecisionTreeClassifier(BaseClassifier):
    """Binary CART tree minimizing Gini impurity, grown to ``max_depth``.

    Leaves may hold a single sample; there is no pruning. Leaves predict
    their majority class, ties going to the smallest class id.
    """

    kind = "decision_tree"

    def __init__(self, max_depth=20):
        self.max_depth = max_depth

    def _fit(self, X, y_idx):
        _check_depth(self.max_depth)
        self.tree_ = grow_classification_tree(
            X, y_idx, self.n_classes_, max_depth=self.max_depth, presorted=presort(X)
        )

    def _predict_proba(self, X):
        return self.tree_.predict_value(X)


class RandomForestClassifier(BaseClassifier):
    """Bagged CART trees with per-split feature subsampling and majority vote.

    Tree ``t`` draws its bootstrap sample and its split candidates from
    ``numpy.random.default_rng(SeedSequence(random_state).spawn(n_estimators)[t])``,
    so each tree's randomness is fixed by the seed alone. Duplicate
    bootstrap draws enter the tree as integer sample weights.

    ``predict_proba`` returns vote fractions.
    """

    kind = "random_forest"

    def __init__(self, n_estimators=10, max_depth=20, max_features=5, bootstrap=True,
                 random_state=0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def _fit(self, X, y_idx):
        _check_depth(self.max_depth)
        if int(self.n_estimators) != self.n_estimators or self.n_estimators < 1:
            raise ValidationError(f"n_estimators must be a positive integer, got {self.n_estimators!r}")
        max_features = self.max_features
        if max_features is not None:
            if int(max_features) != max_features or max_features < 1:
                raise ValidationError(f"max_features must be a positive integer, got {max_features!r}")
            max_features = min(int(max_features), X.shape[1])

        n = X.shape[0]
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_estimators)
        self.tree_seeds_ = [int(s.generate_state(1)[0]) for s in seeds]
        self.estimators_ = []
        for seed in seeds:
            rng = np.random.default_rng(seed)
            if self.bootstrap:
                counts = np.bincount(rng.integers(0, n, n), minlength=n)
                rows = np.flatnonzero(counts)
                weight = counts[rows].astype(np.float64)
            else:
                rows, weight = np.arange(n), None
            tree = grow_classification_tree(
                X[rows], y_idx[rows], self.n_classes_, sample_weight=weight,
                max_depth=self.max_depth, max_features=max_features, rng=rng,
            )
            self.estimators_.append(tree)

    def _votes(self, X):
        votes = np.zeros((X.shape[0], self.n_classes_))
        rows = np.arange(X.shape[0])
        for tree in self.estimators_:
            votes[rows, np.argmax(tree.predict_value(X), axis=1)] += 1
        return votes

    def _predict_proba(self, X):
        return self._votes(X) / len(self.estimators_)
