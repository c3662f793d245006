"""Hold out 10% of the edges and try to recover them.

A GCN with a Hadamard decoder is compared with logistic regression on
Hadamard products of graph embeddings and with random vectors.  Graph
embeddings are recomputed on the training graph so held-out edges stay
hidden.

Run: python3 demos/04_link_prediction.py   (about 1 min)
"""

from charnet import planted_partition
from charnet.embed import WalkConfig, laplacian_eigenmap, node2vec
from charnet.evaluation import edge_split, embedding_link_baseline, gnn_link_auc, random_embedding
from charnet.gnn import TrainConfig

bench = planted_partition()
split = edge_split(bench.graph, 0.1, seed=0)
print(f"{len(split.test_pos)} held-out edges, {len(split.test_neg)} non-edges, "
      f"training graph keeps {split.g_train.m} edges")

gt = split.g_train
candidates = {
    "node2vec + LR": node2vec(gt, WalkConfig(seed=0)),
    "Laplacian eigenmap + LR": laplacian_eigenmap(gt, dim=20, component="all"),
    "random vectors + LR": random_embedding(gt.nodes, 20, seed=0),
}
for name, emb in candidates.items():
    print(f"  {name:26} AUC {embedding_link_baseline(emb, gt, split.test_pos, split.test_neg):.3f}")
auc = gnn_link_auc(split, "ohe", TrainConfig.link_prediction(epochs=3000))
print(f"  {'GCN-OHE (3000 epochs)':26} AUC {auc:.3f}")
