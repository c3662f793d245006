"""Laplacian Eigenmaps and a PCA projection for plotting."""

from __future__ import annotations

import numpy as np

from ..graph import CharacterGraph, connected_components
from .matrix import EmbeddingMatrix

ZERO_EIGENVALUE_TOL = 1e-9


def normalized_laplacian(g: CharacterGraph, weighted: bool = False) -> np.ndarray:
    """``I - D^-1/2 A D^-1/2``; isolated nodes get a diagonal 1."""
    A = g.adjacency_matrix(weighted=weighted)
    deg = A.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    return np.eye(g.n) - inv_sqrt[:, None] * A * inv_sqrt[None, :]


def _fix_signs(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > tol)
        if len(nz) and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def laplacian_eigenmap(
    g: CharacterGraph, dim: int = 20, weighted: bool = False, component: str = "largest"
) -> EmbeddingMatrix:
    """Eigenvectors of the ``dim`` smallest nonzero normalized-Laplacian eigenvalues.

    ``component="largest"`` embeds only the largest connected component of a
    disconnected graph (``diagnostics["largest_component_only"]``).
    ``component="all"`` keeps every node and skips one zero eigenvalue per
    component instead.  The first nonzero entry of each vector is positive.
    """
    if component not in ("largest", "all"):
        raise ValueError("component must be 'largest' or 'all'")
    comps = connected_components(g)
    partial = component == "largest" and len(comps) > 1
    h = g.subgraph(comps[0]) if partial else g
    if dim >= h.n:
        raise ValueError(f"dim={dim} must be smaller than the node count {h.n}")
    L = normalized_laplacian(h, weighted)
    evals, evecs = np.linalg.eigh(L)
    n_zero = int(np.sum(np.abs(evals) < ZERO_EIGENVALUE_TOL))
    if n_zero + dim > h.n:
        raise ValueError(f"only {h.n - n_zero} nonzero eigenvalues, dim={dim} requested")
    lam = evals[n_zero : n_zero + dim]
    vecs = _fix_signs(evecs[:, n_zero : n_zero + dim])
    residual = float(np.max(np.abs(L @ vecs - vecs * lam))) if dim else 0.0
    return EmbeddingMatrix(
        entity_ids=h.nodes,
        vectors=vecs,
        provenance="laplacian_eigenmap",
        config={"dim": dim, "weighted": weighted, "component": component},
        diagnostics={
            "eigenvalues": lam.tolist(),
            "zero_eigenvalues": n_zero,
            "max_residual": residual,
            "largest_component_only": partial,
        },
    )


def project_2d(e: EmbeddingMatrix) -> dict[str, tuple[float, float]]:
    """Project onto the top two principal components of the centred vectors."""
    if e.dim < 2:
        raise ValueError("need at least 2 dimensions")
    if len(e) < 2:
        raise ValueError("need at least 2 entities")
    X = e.vectors - e.vectors.mean(axis=0)
    if not np.any(np.abs(X) > 0):
        return {k: (0.0, 0.0) for k in e.entity_ids}
    _, _, vt = np.linalg.svd(X, full_matrices=False)
    comps = vt[:2]
    for row in comps:
        # deterministic orientation: largest-magnitude loading positive
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    Y = X @ comps.T
    return {k: (float(x), float(y)) for k, (x, y) in zip(e.entity_ids, Y)}
