"""Which block does a character belong to?  GCN, GAT and logistic regression.

Uses shortened training (500 epochs at lr 1e-3) so it finishes quickly;
the acceptance suite runs the full 5000-epoch schedule.

Run: python3 demos/03_node_classification.py   (about 1 min)
"""

from charnet import benchmark_embeddings, planted_partition
from charnet.evaluation import kfold_node_cv, results_table, semi_supervised_mask
from charnet.gnn import TrainConfig, train_node_classifier

bench = planted_partition()
embeddings = benchmark_embeddings(bench)
short = TrainConfig.node_classification(epochs=500, learning_rate=1e-3)

reports = [
    kfold_node_cv(bench.graph, "ohe", bench.labels, 10, "gcn", short, feature_source="ohe"),
    kfold_node_cv(bench.graph, embeddings["node2vec"], bench.labels, 10, "gcn", short),
    kfold_node_cv(bench.graph, "ohe", bench.labels, 10, "gat", short, feature_source="ohe"),
    kfold_node_cv(bench.graph, embeddings["node2vec"], bench.labels, 10, "logreg"),
    kfold_node_cv(bench.graph, embeddings["word_context"], bench.labels, 10, "logreg"),
]
print(results_table(reports))

# one labelled character per block; the graph does the rest
mask = semi_supervised_mask(bench.labels, 1, seed=0)
res = train_node_classifier(bench.graph, embeddings["node2vec"], bench.labels, mask,
                            TrainConfig.node_classification())
hits = sum(res.predictions[v] == bench.labels[v] for v in bench.graph.nodes if v not in mask)
print(f"3 labels {mask}: {hits}/{bench.graph.n - 3} other characters classified correctly")
