"""Weighted undirected character graphs and their network metrics."""

from __future__ import annotations

import csv
import io
import math
import warnings
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .cooccur import EdgeList

__all__ = [
    "GraphError",
    "CharacterGraph",
    "PathStats",
    "build_graph",
    "merge_graphs",
    "density",
    "undirected_density",
    "degree",
    "mean_degree",
    "shortest_path_stats",
    "betweenness",
    "rank_centrality",
    "connected_components",
    "largest_component",
    "layout_fr",
    "graph_metrics",
    "write_graphml",
    "read_graphml",
    "layout_to_csv",
]


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class CharacterGraph:
    """Immutable weighted undirected graph keyed by canonical character id.

    ``nodes`` is sorted, so node ``i`` of :meth:`adjacency_matrix` is
    ``nodes[i]``.
    """

    nodes: tuple[str, ...]
    adjacency: Mapping[str, Mapping[str, int]]
    node_attributes: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return sum(len(nb) for nb in self.adjacency.values()) // 2

    @property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def __contains__(self, node: str) -> bool:
        return node in self.adjacency

    def neighbors(self, node: str) -> list[str]:
        return list(self.adjacency[node])

    def weight(self, u: str, v: str) -> int:
        return self.adjacency[u].get(v, 0)

    def has_edge(self, u: str, v: str) -> bool:
        return v in self.adjacency.get(u, {})

    def edges(self) -> list[tuple[str, str, int]]:
        return [(u, v, w) for u in self.nodes for v, w in self.adjacency[u].items() if u < v]

    def adjacency_matrix(self, weighted: bool = False) -> np.ndarray:
        idx = self.index
        A = np.zeros((self.n, self.n))
        for u, v, w in self.edges():
            A[idx[u], idx[v]] = A[idx[v], idx[u]] = w if weighted else 1.0
        return A

    def subgraph(self, nodes: Iterable[str]) -> "CharacterGraph":
        keep = set(nodes)
        edges = [(u, v, w) for u, v, w in self.edges() if u in keep and v in keep]
        attrs = {v: a for v, a in self.node_attributes.items() if v in keep}
        return build_graph(edges, nodes=keep, attributes=attrs)

    def without_edges(self, pairs: Iterable[tuple[str, str]]) -> "CharacterGraph":
        drop = {(min(u, v), max(u, v)) for u, v in pairs}
        edges = [(u, v, w) for u, v, w in self.edges() if (u, v) not in drop]
        return build_graph(edges, nodes=self.nodes, attributes=self.node_attributes)

    def with_attributes(self, attributes: Mapping[str, Mapping[str, str]]) -> "CharacterGraph":
        merged = {v: dict(self.node_attributes.get(v, {})) for v in self.nodes}
        for v, attrs in attributes.items():
            if v in merged:
                merged[v].update(attrs)
        return CharacterGraph(self.nodes, self.adjacency, {v: a for v, a in merged.items() if a})


def build_graph(
    edges: EdgeList | Iterable[tuple[str, str, int]],
    nodes: Iterable[str] = (),
    attributes: Mapping[str, Mapping[str, str]] | None = None,
) -> CharacterGraph:
    """Graph from weighted pairs; repeated pairs have their weights added."""
    entries = edges.entries if isinstance(edges, EdgeList) else edges
    adj: dict[str, dict[str, int]] = {v: {} for v in nodes}
    for u, v, w in entries:
        if u == v:
            raise GraphError(f"self-loop on {u!r}")
        w = int(w)
        if w < 1:
            raise GraphError(f"edge ({u!r}, {v!r}) has weight {w} < 1")
        adj.setdefault(u, {})
        adj.setdefault(v, {})
        adj[u][v] = adj[u].get(v, 0) + w
        adj[v][u] = adj[v].get(u, 0) + w
    order = tuple(sorted(adj))
    adjacency = {v: dict(sorted(adj[v].items())) for v in order}
    attrs = {v: dict(a) for v, a in (attributes or {}).items() if v in adjacency}
    return CharacterGraph(order, adjacency, attrs)


def merge_graphs(graphs: Iterable[CharacterGraph]) -> CharacterGraph:
    """Node union with summed edge weights."""
    nodes: set[str] = set()
    edges: list[tuple[str, str, int]] = []
    attrs: dict[str, dict[str, str]] = {}
    for g in graphs:
        nodes.update(g.nodes)
        edges.extend(g.edges())
        for v, a in g.node_attributes.items():
            attrs.setdefault(v, {}).update(a)
    return build_graph(edges, nodes=nodes, attributes=attrs)


def density(g: CharacterGraph) -> float:
    """``m / (n (n - 1))`` with each undirected edge counted once."""
    if g.n < 2:
        raise GraphError("density is undefined for fewer than 2 nodes")
    return g.m / (g.n * (g.n - 1))


def undirected_density(g: CharacterGraph) -> float:
    """Conventional ``2m / (n (n - 1))``."""
    return 2.0 * density(g)


def degree(g: CharacterGraph, v: str) -> int:
    if v not in g:
        raise KeyError(f"unknown node {v!r}")
    return len(g.adjacency[v])


def mean_degree(g: CharacterGraph) -> float:
    if g.n == 0:
        raise GraphError("mean degree of an empty graph is undefined")
    return 2.0 * g.m / g.n


def _bfs_distances(g: CharacterGraph, source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g.adjacency[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def connected_components(g: CharacterGraph) -> list[list[str]]:
    """Components as sorted member lists, largest first, ties by smallest member."""
    seen: set[str] = set()
    comps = []
    for v in g.nodes:
        if v not in seen:
            comp = sorted(_bfs_distances(g, v))
            seen.update(comp)
            comps.append(comp)
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def largest_component(g: CharacterGraph) -> CharacterGraph:
    if g.n == 0:
        raise GraphError("empty graph has no components")
    comps = connected_components(g)
    if len(comps) == 1:
        return g
    return g.subgraph(comps[0])


@dataclass(frozen=True)
class PathStats:
    diameter: int
    average: float
    largest_component_only: bool


def shortest_path_stats(g: CharacterGraph) -> PathStats:
    """Unweighted diameter and mean distance over unordered node pairs.

    Disconnected graphs are measured on their largest component, flagged in
    the result.
    """
    if g.n == 0:
        raise GraphError("shortest paths of an empty graph are undefined")
    h = largest_component(g)
    partial = h.n != g.n
    if partial:
        warnings.warn("graph is disconnected; using its largest component", stacklevel=2)
    total = pairs = diameter = 0
    for s in h.nodes:
        for t, d in _bfs_distances(h, s).items():
            if s < t:
                total += d
                pairs += 1
                diameter = max(diameter, d)
    return PathStats(diameter, total / pairs if pairs else 0.0, partial)


def betweenness(g: CharacterGraph, normalized: bool = False) -> dict[str, float]:
    """Shortest-path betweenness of an unweighted undirected graph (Brandes).

    Each unordered pair of endpoints counts once and endpoints are excluded.
    ``normalized`` divides by ``(n - 1)(n - 2) / 2``.
    """
    nodes = g.nodes
    idx = g.index
    nbrs = [[idx[w] for w in g.adjacency[v]] for v in nodes]
    n = len(nodes)
    cb = [0.0] * n
    for s in range(n):
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
    scale = 0.5
    if normalized:
        scale = 0.5 / ((n - 1) * (n - 2) / 2) if n > 2 else 0.0
    return {v: cb[i] * scale for i, v in enumerate(nodes)}


def rank_centrality(g: CharacterGraph, measure: str = "degree", k: int | None = None) -> list[str]:
    """Top-``k`` nodes by degree or betweenness; ties go to the smaller id."""
    k = g.n if k is None else k
    if k > g.n:
        raise ValueError(f"k={k} exceeds node count {g.n}")
    if measure == "degree":
        values = {v: float(degree(g, v)) for v in g.nodes}
    elif measure == "betweenness":
        values = betweenness(g)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    # rounding keeps float noise from breaking exact ties
    return sorted(g.nodes, key=lambda v: (-round(values[v], 9), v))[:k]


def layout_fr(
    g: CharacterGraph, iterations: int = 50, seed: int = 0, area: float = 1.0
) -> dict[str, tuple[float, float]]:
    """Fruchterman-Reingold force-directed layout.

    Ideal edge length is ``sqrt(area / n)``; the step cap starts at a tenth
    of the frame width and cools linearly to zero.  Output is mean-centred.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    n = g.n
    if n == 0:
        return {}
    if n == 1:
        return {g.nodes[0]: (0.0, 0.0)}
    rng = np.random.default_rng(seed)
    width = math.sqrt(area)
    pos = rng.uniform(-width / 2, width / 2, size=(n, 2))
    A = g.adjacency_matrix() > 0
    k = math.sqrt(area / n)
    t0 = width / 10.0
    for it in range(iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(delta, axis=-1)
        np.fill_diagonal(dist, 1.0)
        dist = np.maximum(dist, 1e-9)
        force = k * k / dist - np.where(A, dist * dist / k, 0.0)
        np.fill_diagonal(force, 0.0)
        disp = np.einsum("ij,ijd->id", force / dist, delta)
        length = np.maximum(np.linalg.norm(disp, axis=1), 1e-12)
        temp = t0 * (1.0 - it / iterations)
        pos += disp / length[:, None] * np.minimum(length, temp)[:, None]
    pos -= pos.mean(axis=0)
    return {v: (float(x), float(y)) for v, (x, y) in zip(g.nodes, pos)}


def graph_metrics(g: CharacterGraph) -> dict:
    stats = shortest_path_stats(g)
    return {
        "nodes": g.n,
        "edges": g.m,
        "density": density(g),
        "undirected_density": undirected_density(g),
        "mean_degree": mean_degree(g),
        "diameter": stats.diameter,
        "avg_shortest_path": stats.average,
        "largest_component_only": stats.largest_component_only,
    }


def layout_to_csv(layout: Mapping[str, tuple[float, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node", "x", "y"])
    for v in sorted(layout):
        x, y = layout[v]
        writer.writerow([v, repr(x), repr(y)])
    return buf.getvalue()


_NS = "http://graphml.graphdrawing.org/xmlns"


def write_graphml(g: CharacterGraph, path: str | Path) -> None:
    ET.register_namespace("", _NS)
    root = ET.Element(f"{{{_NS}}}graphml")
    attr_names = sorted({k for a in g.node_attributes.values() for k in a})
    for name in attr_names:
        ET.SubElement(root, f"{{{_NS}}}key", {"id": name, "for": "node", "attr.name": name, "attr.type": "string"})
    ET.SubElement(root, f"{{{_NS}}}key", {"id": "weight", "for": "edge", "attr.name": "weight", "attr.type": "int"})
    graph = ET.SubElement(root, f"{{{_NS}}}graph", {"id": "G", "edgedefault": "undirected"})
    for v in g.nodes:
        node = ET.SubElement(graph, f"{{{_NS}}}node", {"id": v})
        for name in attr_names:
            if name in g.node_attributes.get(v, {}):
                ET.SubElement(node, f"{{{_NS}}}data", {"key": name}).text = str(g.node_attributes[v][name])
    for u, v, w in g.edges():
        edge = ET.SubElement(graph, f"{{{_NS}}}edge", {"source": u, "target": v})
        ET.SubElement(edge, f"{{{_NS}}}data", {"key": "weight"}).text = str(w)
    ET.indent(root)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)


def read_graphml(path: str | Path) -> CharacterGraph:
    root = ET.parse(path).getroot()
    ns = {"g": _NS}
    keys = {k.get("id"): k.get("attr.name") for k in root.findall("g:key", ns)}
    graph = root.find("g:graph", ns)
    nodes, attrs, edges = [], {}, []
    for node in graph.findall("g:node", ns):
        v = node.get("id")
        nodes.append(v)
        data = {keys[d.get("key")]: d.text or "" for d in node.findall("g:data", ns)}
        if data:
            attrs[v] = data
    for edge in graph.findall("g:edge", ns):
        w = 1
        for d in edge.findall("g:data", ns):
            if keys.get(d.get("key")) == "weight":
                w = int(d.text)
        edges.append((edge.get("source"), edge.get("target"), w))
    return build_graph(edges, nodes=nodes, attributes=attrs)
