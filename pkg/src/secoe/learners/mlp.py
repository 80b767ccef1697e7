"""One-hidden-layer perceptron with softmax output, trained with Adam."""
from __future__ import annotations

import numpy as np

DEFAULTS = {
    "hidden": 100,
    "learning_rate": 1e-3,
    "beta1": 0.9,
    "beta2": 0.999,
    "epsilon": 1e-8,
    "alpha": 1e-4,
    "batch_size": 200,
    "max_epochs": 200,
    "tol": 1e-4,
    "n_iter_no_change": 10,
    "init": "glorot",
}


def check_params(p: dict) -> None:
    if int(p["hidden"]) < 1:
        raise ValueError("hidden must be >= 1")
    if not p["learning_rate"] > 0:
        raise ValueError("learning_rate must be > 0")
    if not (0 <= p["beta1"] < 1 and 0 <= p["beta2"] < 1):
        raise ValueError("Adam decay rates must lie in [0, 1)")
    if p["alpha"] < 0 or p["tol"] < 0:
        raise ValueError("alpha and tol must be >= 0")
    if int(p["batch_size"]) < 1 or int(p["max_epochs"]) < 1 or int(p["n_iter_no_change"]) < 1:
        raise ValueError("batch_size, max_epochs and n_iter_no_change must be >= 1")
    if p["init"] not in ("glorot", "zeros"):
        raise ValueError(f"unknown init {p['init']!r}")


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def init_params(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator, init: str = "glorot"):
    params = []
    for fan_in, fan_out in ((n_in, n_hidden), (n_hidden, n_out)):
        if init == "zeros":
            params += [np.zeros((fan_in, fan_out)), np.zeros(fan_out)]
        else:
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            params += [rng.uniform(-bound, bound, (fan_in, fan_out)), rng.uniform(-bound, bound, fan_out)]
    return params


def forward(params, X):
    W1, b1, W2, b2 = params
    z1 = X @ W1 + b1
    a1 = np.maximum(z1, 0.0)
    return z1, a1, softmax(a1 @ W2 + b2)


def loss_and_grads(params, X, Y, alpha):
    """Mean cross-entropy plus L2 penalty ``alpha/(2n)*||W||^2`` and its gradient.

    ``Y`` is one-hot.
    """
    W1, b1, W2, b2 = params
    n = X.shape[0]
    z1, a1, P = forward(params, X)
    ce = -np.sum(Y * np.log(np.clip(P, 1e-300, None))) / n
    loss = ce + 0.5 * alpha * (np.sum(W1 * W1) + np.sum(W2 * W2)) / n
    d2 = (P - Y) / n
    gW2 = a1.T @ d2 + alpha * W2 / n
    gb2 = d2.sum(axis=0)
    d1 = (d2 @ W2.T) * (z1 > 0.0)
    gW1 = X.T @ d1 + alpha * W1 / n
    gb1 = d1.sum(axis=0)
    return loss, [gW1, gb1, gW2, gb2]


class MLPClassifier:
    family = "mlp"

    def __init__(self, **params):
        self.params = {**DEFAULTS, **params}
        check_params(self.params)
        self.weights = None
        self.loss_curve: list[float] = []

    def fit(self, X, y, n_classes, rng: np.random.Generator):
        p = self.params
        n, d = X.shape
        Y = np.eye(n_classes)[y]
        self.weights = init_params(d, int(p["hidden"]), n_classes, rng, p["init"])
        m = [np.zeros_like(w) for w in self.weights]
        v = [np.zeros_like(w) for w in self.weights]
        lr, b1, b2, eps = p["learning_rate"], p["beta1"], p["beta2"], p["epsilon"]
        batch = min(int(p["batch_size"]), n)
        best, stall, t = np.inf, 0, 0
        self.loss_curve = []
        for _ in range(int(p["max_epochs"])):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                loss, grads = loss_and_grads(self.weights, X[idx], Y[idx], p["alpha"])
                total += loss * idx.size
                t += 1
                step = lr * np.sqrt(1.0 - b2 ** t) / (1.0 - b1 ** t)
                for w, g, mi, vi in zip(self.weights, grads, m, v):
                    mi *= b1
                    mi += (1.0 - b1) * g
                    vi *= b2
                    vi += (1.0 - b2) * g * g
                    w -= step * mi / (np.sqrt(vi) + eps)
            epoch_loss = total / n
            self.loss_curve.append(epoch_loss)
            if epoch_loss > best - p["tol"]:
                stall += 1
            else:
                stall = 0
            best = min(best, epoch_loss)
            if stall > int(p["n_iter_no_change"]):
                break
        return self

    def predict_proba(self, X):
        return forward(self.weights, X)[2]

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def get_state(self) -> dict:
        return {f"w{i}": w for i, w in enumerate(self.weights)}

    def set_state(self, state: dict):
        self.weights = [np.asarray(state[f"w{i}"], dtype=np.float64) for i in range(4)]
        return self


def gradient_check(X, y, n_classes, hidden=8, alpha=1e-4, seed=0, init="glorot", step=1e-5, floor=1e-6):
    """Largest elementwise relative gap between backprop and central differences.

    Entries where both gradients are below ``floor`` are compared against
    ``floor`` instead of their own magnitude.
    """
    rng = np.random.default_rng(seed)
    params = init_params(X.shape[1], hidden, n_classes, rng, init)
    Y = np.eye(n_classes)[y]
    _, analytic = loss_and_grads(params, X, Y, alpha)
    worst = 0.0
    for w, g in zip(params, analytic):
        flat = w.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            lp, _ = loss_and_grads(params, X, Y, alpha)
            flat[i] = orig - step
            lm, _ = loss_and_grads(params, X, Y, alpha)
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * step)
            denom = max(abs(numeric), abs(gflat[i]), floor)
            worst = max(worst, abs(numeric - gflat[i]) / denom)
    return worst
