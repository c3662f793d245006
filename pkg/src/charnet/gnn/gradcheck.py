"""Finite-difference verification of the analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..graph import CharacterGraph, build_graph
from .layers import init_params, structure_for
from .logistic import logistic_loss_and_grads
from .train import link_loss, node_classification_loss


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """Largest elementwise ``|a - n| / max(|a| + |n|, floor)``."""
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def numeric_gradient(f: Callable[[], float], array: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central differences of ``f`` with respect to every entry of ``array`` (mutated in place, restored)."""
    grad = np.zeros_like(array)
    it = np.nditer(array, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = array[i]
        array[i] = old + h
        up = f()
        array[i] = old - h
        down = f()
        array[i] = old
        grad[i] = (up - down) / (2 * h)
    return grad


def random_connected_graph(n: int, extra_edges: int, rng: np.random.Generator) -> CharacterGraph:
    """Random spanning tree on ``n`` nodes plus up to ``extra_edges`` random chords."""
    names = [f"n{i}" for i in range(n)]
    edges = {(names[int(rng.integers(0, i))], names[i]) for i in range(1, n)}
    for _ in range(extra_edges):
        a, b = rng.choice(n, size=2, replace=False)
        u, v = sorted((names[a], names[b]))
        edges.add((u, v))
    return build_graph([(u, v, int(rng.integers(1, 4))) for u, v in sorted(edges)], nodes=names)


def gradient_check(model: str, seed: int = 0, h: float = 1e-5, task: str = "classification",
                   weighted: bool = False) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``model`` is ``"gcn"``, ``"gat"`` or ``"logistic"``.  GNN instances are
    seeded random 5-node graphs with 3 features; the logistic instance is 10
    random points.  ``task`` selects the classification or link loss.
    """
    rng = np.random.default_rng(seed)
    if model == "logistic":
        X = rng.normal(size=(10, 3))
        errs = []
        for binary in (False, True):
            y = rng.integers(0, 2 if binary else 3, size=10)
            params = {"W": rng.normal(size=3 if binary else (3, 3)), "b": rng.normal(size=() if binary else 3)}
            _, grads = logistic_loss_and_grads(params["W"], params["b"], X, y, binary)
            for name, arr in params.items():
                arr = np.atleast_1d(arr) if arr.ndim == 0 else arr
                params[name] = arr
                f = lambda: logistic_loss_and_grads(params["W"], params["b"], X, y, binary)[0]
                errs.append(relative_error(np.atleast_1d(grads[name]), numeric_gradient(f, arr, h)))
        return max(errs)
    if model not in ("gcn", "gat"):
        raise ValueError(f"unknown model {model!r}")
    g = random_connected_graph(5, 3, rng)
    X = rng.normal(size=(g.n, 3))
    structure = structure_for(model, g, weighted)
    out_dim = 3 if task == "classification" else 4
    params = init_params(model, 3, out_dim, hidden=4, seed=seed)
    # random (not zero) biases so no ReLU input sits at a kink
    arrays = {k: v + rng.normal(scale=0.1, size=v.shape) for k, v in params.arrays.items()}
    params = params.replace(arrays)
    if task == "classification":
        y = rng.integers(0, out_dim, size=g.n)
        rows = np.array([0, 1, 3, 4])
        loss_fn = lambda: node_classification_loss(params, X, structure, y, rows)
    else:
        pairs = np.array([[0, 1], [1, 2], [2, 4], [0, 3], [3, 4], [1, 4]])
        targets = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
        loss_fn = lambda: link_loss(params, X, structure, pairs, targets)
    _, grads = loss_fn()
    worst = 0.0
    for name, arr in params.arrays.items():
        numeric = numeric_gradient(lambda: loss_fn()[0], arr, h)
        worst = max(worst, relative_error(grads[name], numeric))
    return worst
