"""Three ways to embed characters, compared on the planted-partition benchmark.

node2vec and Laplacian eigenmaps read the graph; word-context vectors read
the synthetic text.  Blocks that are tight in the graph should be tight in
the embedding too.

Run: python3 demos/02_embeddings.py   (about 30 s)
"""

import numpy as np

from charnet import benchmark_embeddings, planted_partition
from charnet.embed import project_2d

bench = planted_partition()
print(f"benchmark: {bench.graph.n} characters, {bench.graph.m} edges, blocks A/B/C")

embeddings = benchmark_embeddings(bench)
for name, emb in embeddings.items():
    X = emb.aligned(bench.graph.nodes)
    # word vectors share one dominant direction; centre columns before comparing
    X = X - X.mean(axis=0)
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    sim = X @ X.T
    same = np.array([[bench.labels[u] == bench.labels[v] for v in bench.graph.nodes] for u in bench.graph.nodes])
    np.fill_diagonal(same, False)
    other = ~same
    np.fill_diagonal(other, False)
    print(f"  {name:20} dim {emb.dim:3}  mean cosine within block {sim[same].mean():+.3f}"
          f"  across blocks {sim[other].mean():+.3f}")

le = embeddings["laplacian_eigenmap"]
print("  smallest nonzero eigenvalues:", np.round(le.diagnostics["eigenvalues"][:4], 4))

xy = project_2d(embeddings["node2vec"])
for block in "ABC":
    pts = np.array([xy[v] for v in bench.graph.nodes if bench.labels[v] == block])
    print(f"  node2vec 2-D centroid of block {block}: ({pts[:, 0].mean():+.2f}, {pts[:, 1].mean():+.2f})")
