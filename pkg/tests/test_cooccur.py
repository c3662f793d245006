import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charnet.characters import MentionRecord, compile_alias_table, extract_mentions
from charnet.cooccur import EdgeList, read_edges_csv, sentence_cooccurrences, window_cooccurrences
from charnet.corpus import RawDocument, load_corpus


def pipeline(text, names):
    table = compile_alias_table([(n, n) for n in names])
    c = load_corpus([RawDocument("w", "W", text)], table.segmentation_config())
    return c, extract_mentions(c, table)


def test_pair_in_one_sentence():
    c, ms = pipeline("Frodo met Sam.", ["Frodo", "Sam"])
    assert sentence_cooccurrences(ms, c).entries == (("Frodo", "Sam", 1),)


def test_three_characters_give_three_edges():
    c, ms = pipeline("Frodo, Sam and Gollum walked.", ["Frodo", "Sam", "Gollum"])
    expected = {tuple(sorted(p)) + (1,) for p in itertools.combinations(["Frodo", "Sam", "Gollum"], 2)}
    assert set(sentence_cooccurrences(ms).entries) == expected


def test_repeats_count_once_and_no_self_loops():
    c, ms = pipeline("Frodo and Frodo and Sam.", ["Frodo", "Sam"])
    assert sentence_cooccurrences(ms).entries == (("Frodo", "Sam", 1),)
    assert sentence_cooccurrences(ms, count_multiplicity=True).entries == (("Frodo", "Sam", 2),)


def test_fixture_edges_match_gold(fixture_mentions, fixture_corpus, gold_dir):
    assert sentence_cooccurrences(fixture_mentions, fixture_corpus).to_csv() == \
        (gold_dir / "fixture_edges.csv").read_text(encoding="utf-8")


def test_window_threshold():
    for gap, expected in ((1999, 1), (2000, 1), (2001, 0)):
        c, ms = pipeline("Frodo " + "y" * (gap - 7) + " Sam", ["Frodo", "Sam"])
        # offsets: Frodo at 0, Sam at gap
        assert ms[1].token_start == 2 and c.tokens[2].char_offset == gap
        assert len(window_cooccurrences(ms, c, 2000)) == expected


def test_window_does_not_cross_chapters():
    c, ms = pipeline("Chapter 1\nFrodo ran.\nChapter 2\nSam ran.", ["Frodo", "Sam"])
    assert c.tokens[ms[1].token_start].char_offset - c.tokens[ms[0].token_start].char_offset < 100
    assert len(window_cooccurrences(ms, c, 2000)) == 0


def test_window_counts_instance_pairs():
    c, ms = pipeline("Frodo Frodo Sam.", ["Frodo", "Sam"])
    assert window_cooccurrences(ms, c, 2000).entries == (("Frodo", "Sam", 2),)
    assert window_cooccurrences(ms, c, 2000).params == {"window_chars": 2000}


def test_window_must_be_positive(fixture_mentions, fixture_corpus):
    with pytest.raises(ValueError):
        window_cooccurrences(fixture_mentions, fixture_corpus, 0)


def test_edgelist_validation():
    with pytest.raises(ValueError):
        EdgeList((("A", "A", 1),), "sentence")
    with pytest.raises(ValueError):
        EdgeList((("A", "B", 0),), "sentence")
    with pytest.raises(ValueError):
        EdgeList((("A", "B", 1), ("A", "B", 2)), "sentence")


def test_csv_roundtrip(tmp_path, fixture_mentions):
    edges = sentence_cooccurrences(fixture_mentions)
    p = tmp_path / "e.csv"
    p.write_text(edges.to_csv())
    assert read_edges_csv(p).entries == edges.entries


sentences = st.lists(st.lists(st.sampled_from("ABCDE"), max_size=5), min_size=1, max_size=12)


@settings(max_examples=100, deadline=None)
@given(sentences)
def test_sentence_weights_match_brute_force(sents):
    mentions = [MentionRecord(i * 10 + j, i * 10 + j + 1, name, "w", i, 0, False)
                for i, s in enumerate(sents) for j, name in enumerate(s)]
    oracle = Counter()
    for s in sents:
        for a, b in itertools.combinations(sorted(set(s)), 2):
            oracle[(a, b)] += 1
    assert sentence_cooccurrences(mentions).as_dict() == dict(oracle)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.sampled_from(["Frodo", "Sam", "Merry", "Pippin"]), min_size=1, max_size=4),
                min_size=1, max_size=8))
def test_huge_window_contains_sentence_pairs(sents):
    text = " ".join(" and ".join(s) + " ran." for s in sents)
    c, ms = pipeline(text, ["Frodo", "Sam", "Merry", "Pippin"])
    window_pairs = set(window_cooccurrences(ms, c, 10**9).as_dict())
    assert set(sentence_cooccurrences(ms).as_dict()) <= window_pairs
