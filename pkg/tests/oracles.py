"""Independent reference computations used as test oracles."""

from __future__ import annotations

import itertools
import math

import numpy as np


def all_shortest_paths(adj: dict[str, set[str]], s: str, t: str) -> list[tuple[str, ...]]:
    """Every shortest s-t path, found by exhaustive simple-path enumeration."""
    paths = []

    def walk(path):
        v = path[-1]
        if v == t:
            paths.append(tuple(path))
            return
        for x in sorted(adj[v]):
            if x not in path:
                walk(path + [x])

    walk([s])
    if not paths:
        return []
    best = min(len(p) for p in paths)
    return [p for p in paths if len(p) == best]


def brute_force_betweenness(adj: dict[str, set[str]]) -> dict[str, float]:
    """Sum over unordered pairs of the share of shortest paths through each interior node."""
    score = {v: 0.0 for v in adj}
    for s, t in itertools.combinations(sorted(adj), 2):
        paths = all_shortest_paths(adj, s, t)
        for p in paths:
            for v in p[1:-1]:
                score[v] += 1.0 / len(paths)
    return score


def random_connected_adjacency(rng: np.random.Generator, n: int, extra: float) -> dict[str, set[str]]:
    names = [chr(ord("a") + i) for i in range(n)]
    adj = {v: set() for v in names}
    for i in range(1, n):
        j = int(rng.integers(0, i))
        adj[names[i]].add(names[j])
        adj[names[j]].add(names[i])
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < extra:
            adj[names[i]].add(names[j])
            adj[names[j]].add(names[i])
    return adj


def jacobi_eigenvalues(M: np.ndarray, tol: float = 1e-14, sweeps: int = 100) -> np.ndarray:
    """Cyclic Jacobi rotations on a symmetric matrix; returns sorted eigenvalues."""
    A = np.array(M, dtype=np.float64)
    n = A.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(float(np.sum(A**2) - np.sum(np.diag(A) ** 2)))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))


def pairwise_auc(pos, neg) -> float:
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))
