"""The curated alias table for Tolkien's Legendarium on a hand-written passage.

Run: python3 demos/05_legendarium_aliases.py
"""

from importlib import resources
from pathlib import Path

from charnet import RawDocument, extract_mentions, load_corpus, read_alias_table, sentence_cooccurrences

table = read_alias_table(Path(str(resources.files("charnet") / "data" / "tolkien_aliases.tsv")))
print(f"{len(table.canonical_ids)} canonical characters")

passage = """Chapter 1

Mr. Frodo looked up. Sam Gamgee was already packing, and Peregrin Took
complained loudly. "Mithrandir will not wait," said Strider. Gandalf
laughed, and Sam laughed with him.
"""
corpus = load_corpus([RawDocument("demo", "Passage", passage)], table.segmentation_config())
mentions = extract_mentions(corpus, table)
for m in mentions:
    surface = " ".join(corpus.surfaces[m.token_start : m.token_end])
    print(f"  {surface!r:18} -> {m.canonical_id}")
print("co-occurrences:", sentence_cooccurrences(mentions).entries)
