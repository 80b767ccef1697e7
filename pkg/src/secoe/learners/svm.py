"""One-vs-rest linear SVM fitted by mini-batch sub-gradient descent.

Per class c the objective is ``lam/2 ||w_c||^2 + mean(max(0, 1 - t * (x.w_c + b_c)))``
with ``t`` in {-1, +1}. The bias is not regularized.
"""
from __future__ import annotations

import numpy as np

DEFAULTS = {
    "lam": 1e-4,
    "epochs": 1000,
    "batch_size": 256,
    "eta0": 0.1,
}


def check_params(p: dict) -> None:
    if p["lam"] < 0:
        raise ValueError("lam must be >= 0")
    if int(p["epochs"]) < 1 or int(p["batch_size"]) < 1:
        raise ValueError("epochs and batch_size must be >= 1")
    if not p["eta0"] > 0:
        raise ValueError("eta0 must be > 0")


class LinearSVMClassifier:
    family = "linear_svm"

    def __init__(self, **params):
        self.params = {**DEFAULTS, **params}
        check_params(self.params)
        self.W = None
        self.b = None

    def fit(self, X, y, n_classes, rng: np.random.Generator):
        p = self.params
        n, d = X.shape
        T = -np.ones((n, n_classes))
        T[np.arange(n), y] = 1.0
        W = np.zeros((d, n_classes))
        b = np.zeros(n_classes)
        lam = p["lam"]
        batch = min(int(p["batch_size"]), n)
        for epoch in range(int(p["epochs"])):
            eta = p["eta0"] / np.sqrt(1.0 + epoch)
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                Xb, Tb = X[idx], T[idx]
                active = (Tb * (Xb @ W + b)) < 1.0
                G = -(active * Tb)
                gW = lam * W + Xb.T @ G / idx.size
                gb = G.sum(axis=0) / idx.size
                W -= eta * gW
                b -= eta * gb
        self.W, self.b = W, b
        return self

    def decision_function(self, X):
        return X @ self.W + self.b

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)

    def get_state(self) -> dict:
        return {"W": self.W, "b": self.b}

    def set_state(self, state: dict):
        self.W = np.asarray(state["W"], dtype=np.float64)
        self.b = np.asarray(state["b"], dtype=np.float64)
        return self
