"""Character co-occurrence networks from novels, with graph embeddings and GNNs.

The pipeline runs text -> mentions -> co-occurrence edges -> graph, then
embeds the graph (node2vec, Laplacian eigenmaps, word-context vectors) and
trains GCN/GAT models for character classification and link prediction.
Subpackages ``embed`` and ``gnn`` hold the learning code; ``evaluation``
holds metrics, splits and cross-validation.
"""

from .benchmark import PlantedPartition, benchmark_corpus, benchmark_embeddings, planted_partition
from .characters import (
    AliasTable,
    MentionRecord,
    compile_alias_table,
    extract_mentions,
    narrative_chart,
    read_alias_table,
)
from .cooccur import EdgeList, sentence_cooccurrences, window_cooccurrences
from .corpus import RawDocument, TokenizedCorpus, load_corpus, read_manifest
from .graph import (
    CharacterGraph,
    betweenness,
    build_graph,
    density,
    graph_metrics,
    layout_fr,
    mean_degree,
    read_graphml,
    shortest_path_stats,
    write_graphml,
)

__version__ = "0.1.0"

__all__ = [
    "PlantedPartition",
    "benchmark_corpus",
    "benchmark_embeddings",
    "planted_partition",
    "AliasTable",
    "MentionRecord",
    "compile_alias_table",
    "extract_mentions",
    "narrative_chart",
    "read_alias_table",
    "EdgeList",
    "sentence_cooccurrences",
    "window_cooccurrences",
    "RawDocument",
    "TokenizedCorpus",
    "load_corpus",
    "read_manifest",
    "CharacterGraph",
    "betweenness",
    "build_graph",
    "density",
    "graph_metrics",
    "layout_fr",
    "mean_degree",
    "read_graphml",
    "shortest_path_stats",
    "write_graphml",
]
