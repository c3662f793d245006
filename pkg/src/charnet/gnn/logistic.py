"""Full-batch logistic regression (softmax or sigmoid) trained with Adam."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .optim import AdamState, adam_step


@dataclass(frozen=True)
class LogisticModel:
    W: np.ndarray  # (d, C) for softmax, (d,) for binary
    b: np.ndarray
    classes: tuple
    mean: np.ndarray
    scale: np.ndarray
    binary: bool
    loss_history: tuple[float, ...] = ()

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        Xs = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return Xs @ self.W + self.b


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_loss_and_grads(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray, binary: bool, weight_decay: float = 0.0
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy and its gradient; ``y`` holds class indices (0/1 if binary)."""
    n = X.shape[0]
    z = X @ W + b
    if binary:
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
        dz = (_sigmoid(z) - y) / n
    else:
        zs = z - z.max(axis=1, keepdims=True)
        logp = zs - np.log(np.exp(zs).sum(axis=1, keepdims=True))
        loss = float(-np.mean(logp[np.arange(n), y]))
        dz = np.exp(logp)
        dz[np.arange(n), y] -= 1.0
        dz /= n
    grads = {"W": X.T @ dz, "b": dz.sum(axis=0)}
    if weight_decay:
        loss += 0.5 * weight_decay * float(np.sum(W * W))
        grads["W"] = grads["W"] + weight_decay * W
    return loss, grads


def logistic_fit(
    X: np.ndarray,
    labels: Sequence,
    epochs: int = 200,
    learning_rate: float = 0.05,
    standardize: bool = True,
    binary: bool | None = None,
    weight_decay: float = 0.0,
) -> LogisticModel:
    """Fit from zero-initialised weights; ``binary`` defaults to True for labels {0, 1}.

    Features are z-scored with training statistics unless ``standardize``
    is False.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes, got {classes}")
    if binary is None:
        binary = set(classes) == {0, 1}
    if binary and len(classes) != 2:
        raise ValueError("binary logistic regression needs exactly 2 classes")
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[c] for c in labels])
    mean = X.mean(axis=0) if standardize else np.zeros(X.shape[1])
    scale = X.std(axis=0) if standardize else np.ones(X.shape[1])
    scale = np.where(scale > 1e-12, scale, 1.0)
    Xs = (X - mean) / scale
    params = {
        "W": np.zeros(X.shape[1]) if binary else np.zeros((X.shape[1], len(classes))),
        "b": np.zeros(()) if binary else np.zeros(len(classes)),
    }
    state = AdamState()
    history = []
    for _ in range(epochs):
        loss, grads = logistic_loss_and_grads(params["W"], params["b"], Xs, y, binary, weight_decay)
        history.append(loss)
        params, state = adam_step(params, grads, state, learning_rate)
    return LogisticModel(params["W"], params["b"], classes, mean, scale, binary, tuple(history))


def logistic_predict(model: LogisticModel, X: np.ndarray) -> np.ndarray:
    """Class probabilities, one column per ``model.classes`` entry."""
    z = model.decision_function(X)
    if model.binary:
        p = _sigmoid(z)
        return np.column_stack([1.0 - p, p])
    return _softmax(z)


def logistic_classify(model: LogisticModel, X: np.ndarray) -> list:
    return [model.classes[i] for i in np.argmax(logistic_predict(model, X), axis=1)]
