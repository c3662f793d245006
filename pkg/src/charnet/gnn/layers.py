"""Two-layer GCN and GAT models with hand-written backward passes.

Both models map node features ``X`` (n x f) to outputs (n x out) through a
hidden layer of width ``hidden`` with ReLU.  Parameters live in a
:class:`ModelParams` snapshot; forward functions return the output plus a
cache that the matching backward function turns into gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graph import CharacterGraph

LEAKY_SLOPE = 0.2


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    kind: str
    arrays: dict[str, np.ndarray]
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def replace(self, arrays: dict[str, np.ndarray]) -> "ModelParams":
        return ModelParams(self.kind, arrays, self.seed, self.meta)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "meta": self.meta,
            "arrays": {
                k: {"shape": list(v.shape), "values": v.ravel().tolist()} for k, v in sorted(self.arrays.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        arrays = {
            k: np.array(v["values"], dtype=np.float64).reshape(v["shape"]) for k, v in data["arrays"].items()
        }
        return cls(data["kind"], arrays, int(data["seed"]), data.get("meta", {}))


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(kind: str, in_dim: int, out_dim: int, hidden: int = 20, seed: int = 0) -> ModelParams:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    arrays = {
        "W0": _glorot(rng, in_dim, hidden, (in_dim, hidden)),
        "b0": np.zeros(hidden),
        "W1": _glorot(rng, hidden, out_dim, (hidden, out_dim)),
        "b1": np.zeros(out_dim),
    }
    if kind == "gat":
        arrays["a0_src"] = _glorot(rng, hidden, 1, hidden)
        arrays["a0_dst"] = _glorot(rng, hidden, 1, hidden)
        arrays["a1_src"] = _glorot(rng, out_dim, 1, out_dim)
        arrays["a1_dst"] = _glorot(rng, out_dim, 1, out_dim)
    elif kind != "gcn":
        raise ValueError(f"unknown model kind {kind!r}")
    return ModelParams(kind, arrays, seed, {"in_dim": in_dim, "hidden": hidden, "out_dim": out_dim})


def normalize_adjacency(g: CharacterGraph, weighted: bool = False) -> np.ndarray:
    """``D~^-1/2 (A + I) D~^-1/2`` with ``D~`` the row sums of ``A + I``."""
    if g.n == 0:
        raise ValueError("graph has no nodes")
    A = g.adjacency_matrix(weighted=weighted) + np.eye(g.n)
    d = 1.0 / np.sqrt(A.sum(axis=1))
    return d[:, None] * A * d[None, :]


def _check_shapes(params: ModelParams, X: np.ndarray, n: int) -> None:
    if X.shape[0] != n:
        raise ShapeError(f"layer 0: features have {X.shape[0]} rows for {n} nodes")
    if X.shape[1] != params["W0"].shape[0]:
        raise ShapeError(f"layer 0: feature width {X.shape[1]} != W0 rows {params['W0'].shape[0]}")
    if params["W0"].shape[1] != params["W1"].shape[0]:
        raise ShapeError(f"layer 1: W1 rows {params['W1'].shape[0]} != hidden {params['W0'].shape[1]}")


def gcn_forward(
    params: ModelParams, X: np.ndarray, norm_adj: np.ndarray, dropout_mask: np.ndarray | None = None
) -> tuple[np.ndarray, dict]:
    """``out = A relu(A X W0 + b0) W1 + b1``; returns ``(out, cache)``."""
    _check_shapes(params, X, norm_adj.shape[0])
    AX = norm_adj @ X
    Z1 = AX @ params["W0"] + params["b0"]
    H1 = np.maximum(Z1, 0.0)
    H1d = H1 * dropout_mask if dropout_mask is not None else H1
    AH = norm_adj @ H1d
    out = AH @ params["W1"] + params["b1"]
    return out, {"A": norm_adj, "AX": AX, "Z1": Z1, "H1": H1, "AH": AH, "mask": dropout_mask}


def gcn_backward(params: ModelParams, cache: dict, d_out: np.ndarray) -> dict[str, np.ndarray]:
    A = cache["A"]
    grads = {"W1": cache["AH"].T @ d_out, "b1": d_out.sum(axis=0)}
    dH = A.T @ (d_out @ params["W1"].T)
    if cache["mask"] is not None:
        dH = dH * cache["mask"]
    dZ1 = dH * (cache["Z1"] > 0)
    grads["W0"] = cache["AX"].T @ dZ1
    grads["b0"] = dZ1.sum(axis=0)
    return grads


def attention_bias(g: CharacterGraph, weighted: bool = False) -> np.ndarray:
    """Additive attention mask: 0 (or log weight) on edges and self-loops, -inf elsewhere.

    With ``weighted`` each neighbour's softmax term is scaled by its edge
    weight; self-loops have weight 1.
    """
    A = g.adjacency_matrix(weighted=True)
    bias = np.full((g.n, g.n), -np.inf)
    on = A > 0
    bias[on] = np.log(A[on]) if weighted else 0.0
    np.fill_diagonal(bias, 0.0)
    return bias


def _gat_layer(H: np.ndarray, W: np.ndarray, a_src: np.ndarray, a_dst: np.ndarray, b: np.ndarray, bias: np.ndarray):
    Wh = H @ W
    pre = (Wh @ a_src)[:, None] + (Wh @ a_dst)[None, :]
    e = np.where(pre > 0, pre, LEAKY_SLOPE * pre) + bias
    e = e - e.max(axis=1, keepdims=True)
    ex = np.exp(e)
    alpha = ex / ex.sum(axis=1, keepdims=True)
    out = alpha @ Wh + b
    return out, {"H": H, "Wh": Wh, "pre": pre, "alpha": alpha}


def _gat_layer_backward(c: dict, W: np.ndarray, a_src: np.ndarray, a_dst: np.ndarray, d_out: np.ndarray):
    alpha, Wh = c["alpha"], c["Wh"]
    d_alpha = d_out @ Wh.T
    d_e = alpha * (d_alpha - np.sum(d_alpha * alpha, axis=1, keepdims=True))
    d_pre = d_e * np.where(c["pre"] > 0, 1.0, LEAKY_SLOPE)
    d_src = d_pre.sum(axis=1)
    d_dst = d_pre.sum(axis=0)
    dWh = alpha.T @ d_out + np.outer(d_src, a_src) + np.outer(d_dst, a_dst)
    return {
        "W": c["H"].T @ dWh,
        "b": d_out.sum(axis=0),
        "a_src": Wh.T @ d_src,
        "a_dst": Wh.T @ d_dst,
        "H": dWh @ W.T,
    }


def gat_forward(
    params: ModelParams,
    X: np.ndarray,
    graph: CharacterGraph | np.ndarray,
    weighted: bool = False,
    dropout_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, dict]:
    """Single-head attention in both layers; ``graph`` may be a precomputed :func:`attention_bias`.

    ``cache["alpha0"]`` / ``cache["alpha1"]`` hold the attention matrices;
    row ``u`` is the softmax over ``u`` and its neighbours.
    """
    bias = attention_bias(graph, weighted) if isinstance(graph, CharacterGraph) else graph
    _check_shapes(params, X, bias.shape[0])
    Z1, c0 = _gat_layer(X, params["W0"], params["a0_src"], params["a0_dst"], params["b0"], bias)
    H1 = np.maximum(Z1, 0.0)
    H1d = H1 * dropout_mask if dropout_mask is not None else H1
    out, c1 = _gat_layer(H1d, params["W1"], params["a1_src"], params["a1_dst"], params["b1"], bias)
    return out, {"c0": c0, "c1": c1, "Z1": Z1, "H1": H1, "mask": dropout_mask,
                 "alpha0": c0["alpha"], "alpha1": c1["alpha"]}


def gat_backward(params: ModelParams, cache: dict, d_out: np.ndarray) -> dict[str, np.ndarray]:
    g1 = _gat_layer_backward(cache["c1"], params["W1"], params["a1_src"], params["a1_dst"], d_out)
    dH = g1["H"]
    if cache["mask"] is not None:
        dH = dH * cache["mask"]
    dZ1 = dH * (cache["Z1"] > 0)
    g0 = _gat_layer_backward(cache["c0"], params["W0"], params["a0_src"], params["a0_dst"], dZ1)
    return {
        "W1": g1["W"], "b1": g1["b"], "a1_src": g1["a_src"], "a1_dst": g1["a_dst"],
        "W0": g0["W"], "b0": g0["b"], "a0_src": g0["a_src"], "a0_dst": g0["a_dst"],
    }


def forward(params: ModelParams, X: np.ndarray, structure: np.ndarray, dropout_mask=None):
    """Dispatch on ``params.kind``; ``structure`` is the normalized adjacency or attention bias."""
    if params.kind == "gcn":
        return gcn_forward(params, X, structure, dropout_mask)
    return gat_forward(params, X, structure, dropout_mask=dropout_mask)


def backward(params: ModelParams, cache: dict, d_out: np.ndarray) -> dict[str, np.ndarray]:
    if params.kind == "gcn":
        return gcn_backward(params, cache, d_out)
    return gat_backward(params, cache, d_out)


def structure_for(kind: str, g: CharacterGraph, weighted: bool) -> np.ndarray:
    return normalize_adjacency(g, weighted) if kind == "gcn" else attention_bias(g, weighted)
