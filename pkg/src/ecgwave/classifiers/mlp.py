import math

import numpy as np

from .._validation import check_X_y
from ..exceptions import ValidationError
from ._base import BaseClassifier, one_hot, softmax

_ACTIVATIONS = {
    # name: (f, derivative expressed through the activation value a = f(z))
    "tanh": (np.tanh, lambda a: 1.0 - a**2),
    "logistic": (lambda z: 0.5 * (1.0 + np.tanh(0.5 * z)), lambda a: a * (1.0 - a)),
}


class MLPClassifier(BaseClassifier):
    """Feed-forward network with a softmax output, trained with Adam.

    Loss per mini-batch of ``m`` rows is the mean cross-entropy plus
    ``alpha / (2 m) * sum(W**2)`` over the weight matrices (biases are not
    penalized). Weights start uniform in ``+-sqrt(6 / (fan_in + fan_out))``,
    biases at zero. Training stops after ``max_iter`` epochs, or once the
    epoch loss has failed to improve on its best value by at least ``tol``
    for ``n_iter_no_change`` consecutive epochs.
    """

    kind = "mlp"

    def __init__(self, hidden=(50, 100), alpha=0.01, max_iter=1000, activation="tanh",
                 learning_rate=1e-3, batch_size=64, tol=1e-6, n_iter_no_change=10,
                 random_state=0):
        self.hidden = hidden
        self.alpha = alpha
        self.max_iter = max_iter
        self.activation = activation
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.tol = tol
        self.n_iter_no_change = n_iter_no_change
        self.random_state = random_state

    def _validate(self):
        if self.activation not in _ACTIVATIONS:
            raise ValidationError(
                f"activation must be one of {sorted(_ACTIVATIONS)}, got {self.activation!r}"
            )
        hidden = tuple(int(h) for h in self.hidden)
        if any(h < 1 for h in hidden):
            raise ValidationError(f"hidden layer sizes must be positive, got {self.hidden!r}")
        if self.alpha < 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValidationError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        return hidden

    def init_params(self, n_in, n_out, rng):
        """Fresh ``[W1, b1, ..., W_out, b_out]`` for the configured layer sizes."""
        sizes = [n_in, *self._validate(), n_out]
        params = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            params.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
            params.append(np.zeros(fan_out))
        return params

    def _hidden_activations(self, params, X):
        act = _ACTIVATIONS[self.activation][0]
        a = X
        acts = [a]
        for W, b in zip(params[:-2:2], params[1:-2:2]):
            a = act(a @ W + b)
            acts.append(a)
        return acts

    def loss_and_grad(self, params, X, Y):
        """Penalized loss and its gradient for one-hot targets ``Y``."""
        m = X.shape[0]
        acts = self._hidden_activations(params, X)
        logits = acts[-1] @ params[-2] + params[-1]
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        weights = params[::2]
        loss = -(Y * log_p).sum() / m + self.alpha / (2 * m) * sum((W**2).sum() for W in weights)

        deriv = _ACTIVATIONS[self.activation][1]
        grads = [None] * len(params)
        delta = (np.exp(log_p) - Y) / m
        for layer in range(len(weights) - 1, -1, -1):
            W = params[2 * layer]
            grads[2 * layer] = acts[layer].T @ delta + (self.alpha / m) * W
            grads[2 * layer + 1] = delta.sum(axis=0)
            if layer:
                delta = (delta @ W.T) * deriv(acts[layer])
        return loss, grads

    def _fit(self, X, y_idx):
        self._validate()
        rng = np.random.default_rng(self.random_state)
        Y = one_hot(y_idx, self.n_classes_)
        params = self.init_params(X.shape[1], self.n_classes_, rng)

        beta1, beta2, eps = 0.9, 0.999, 1e-8
        m1 = [np.zeros_like(p) for p in params]
        m2 = [np.zeros_like(p) for p in params]
        step = 0
        n = X.shape[0]
        batch = max(1, min(int(self.batch_size), n))
        best, stale = np.inf, 0
        self.loss_curve_ = []
        for epoch in range(int(self.max_iter)):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, batch):
                rows = order[start : start + batch]
                loss, grads = self.loss_and_grad(params, X[rows], Y[rows])
                total += loss * rows.size
                step += 1
                lr = self.learning_rate * math.sqrt(1 - beta2**step) / (1 - beta1**step)
                for p, g, u, v in zip(params, grads, m1, m2):
                    u *= beta1
                    u += (1 - beta1) * g
                    v *= beta2
                    v += (1 - beta2) * g**2
                    p -= lr * u / (np.sqrt(v) + eps)
            epoch_loss = total / n
            self.loss_curve_.append(epoch_loss)
            if epoch_loss > best - self.tol:
                stale += 1
            else:
                stale = 0
            best = min(best, epoch_loss)
            if stale >= self.n_iter_no_change:
                break
        self.n_iter_ = len(self.loss_curve_)
        self.coefs_ = params[::2]
        self.intercepts_ = params[1::2]

    def _params(self):
        return [p for pair in zip(self.coefs_, self.intercepts_) for p in pair]

    def _predict_proba(self, X):
        params = self._params()
        logits = self._hidden_activations(params, X)[-1] @ params[-2] + params[-1]
        return softmax(logits)


def mlp_gradient_check(estimator, X, y, zero_init=False, step=1e-5):
    """Largest relative gap between backprop and central-difference gradients.

    The network is initialised exactly as ``fit`` would (or with all
    parameters zero when ``zero_init``) and every parameter is perturbed by
    ``+-step``. Relative error is ``|g - g_num| / max(|g|, |g_num|, 1e-8)``;
    the floor keeps gradients that are zero in exact arithmetic from
    dividing round-off by round-off.
    """
    X, y = check_X_y(X, y)
    classes, y_idx = np.unique(y, return_inverse=True)
    n_out = max(classes.size, 2)
    Y = one_hot(y_idx.reshape(-1), n_out)
    params = estimator.init_params(X.shape[1], n_out, np.random.default_rng(estimator.random_state))
    if zero_init:
        params = [np.zeros_like(p) for p in params]
    _, grads = estimator.loss_and_grad(params, X, Y)

    worst = 0.0
    for p, g in zip(params, grads):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up, _ = estimator.loss_and_grad(params, X, Y)
            flat[i] = orig - step
            down, _ = estimator.loss_and_grad(params, X, Y)
            flat[i] = orig
            numeric = (up - down) / (2 * step)
            denom = max(abs(gflat[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst
