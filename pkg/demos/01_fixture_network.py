"""From raw chapters to a character network, using the bundled fixture story.

Run: python3 demos/01_fixture_network.py
"""

from importlib import resources
from pathlib import Path

from charnet import (
    build_graph,
    extract_mentions,
    graph_metrics,
    load_corpus,
    narrative_chart,
    read_alias_table,
    read_manifest,
    sentence_cooccurrences,
    window_cooccurrences,
)
from charnet.graph import rank_centrality

data = Path(str(resources.files("charnet") / "data"))
aliases = read_alias_table(data / "fixture_aliases.tsv")
corpus = load_corpus(read_manifest(data / "fixture_manifest.json"), aliases.segmentation_config())
print(f"{len(corpus)} tokens, {len(corpus.sentences)} sentences, {len(corpus.chapters)} chapters")

# every alias ("Mr. Frodo", "Mithrandir") resolves to one canonical id
mentions = extract_mentions(corpus, aliases)
for m in mentions[:6]:
    words = " ".join(corpus.surfaces[m.token_start : m.token_end])
    print(f"  {words!r:24} -> {m.canonical_id:8} chapter {m.chapter_index} dialogue={m.in_dialogue}")

# narrative chart: share of each chapter's narrated (non-dialogue) mentions
chart = narrative_chart(mentions, sorted({m.canonical_id for m in mentions}), corpus)
print()
print(chart.to_csv())

edges = sentence_cooccurrences(mentions)
print("sentence co-occurrences:", edges.entries)
print("2000-char window pairs: ", window_cooccurrences(mentions, corpus, 2000).entries)

g = build_graph(edges.entries)
print()
for key, value in graph_metrics(g).items():
    print(f"  {key:24} {value}")
print("most central by betweenness:", rank_centrality(g, "betweenness", 2))
