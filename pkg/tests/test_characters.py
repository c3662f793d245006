import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charnet.characters import (
    AliasError,
    MentionRecord,
    compile_alias_table,
    count_mention_types,
    extract_mentions,
    narrative_chart,
    read_alias_table,
    read_mentions_csv,
    write_mentions_csv,
)
from charnet.corpus import RawDocument, load_corpus

from conftest import load_gold_chart


def corpus_for(text, aliases):
    return load_corpus([RawDocument("w", "W", text)], aliases.segmentation_config())


def test_alias_lookup_examples():
    table = compile_alias_table([("Sam", "Sam Gamgee"), ("Peregrin", "Pippin")])
    assert table.resolve("Sam") == "Sam Gamgee"
    assert table.resolve("Peregrin") == "Pippin"
    # canonical names are aliases of themselves
    assert table.resolve("Sam Gamgee") == "Sam Gamgee"
    assert table.resolve("Pippin") == "Pippin"


def test_empty_alias_table_is_an_error():
    with pytest.raises(AliasError):
        compile_alias_table([])


def test_conflicting_alias_lists_both_targets():
    with pytest.raises(AliasError, match="Sam Gamgee.*Samwise|Samwise.*Sam Gamgee"):
        compile_alias_table([("Sam", "Sam Gamgee"), ("Sam", "Samwise")])


def test_identical_duplicate_is_harmless():
    table = compile_alias_table([("Sam", "Sam Gamgee"), ("Sam", "Sam Gamgee")])
    assert table.resolve("Sam") == "Sam Gamgee"


def test_two_plain_mentions():
    table = compile_alias_table([("Sam", "Sam Gamgee"), ("Frodo", "Frodo")])
    ms = extract_mentions(corpus_for("Sam saw Frodo", table), table)
    assert [m.canonical_id for m in ms] == ["Sam Gamgee", "Frodo"]


def test_longest_match_wins():
    table = compile_alias_table([("Bilbo Baggins", "Bilbo"), ("Bilbo", "Bilbo")])
    ms = extract_mentions(corpus_for("Bilbo Baggins smiled", table), table)
    assert len(ms) == 1 and ms[0].token_range == (0, 2)


def test_mentions_in_dialogue_are_flagged():
    table = compile_alias_table([("Frodo", "Frodo")])
    ms = extract_mentions(corpus_for('"Frodo!" said Frodo.', table), table)
    assert [m.in_dialogue for m in ms] == [True, False]


def test_matching_is_case_sensitive():
    table = compile_alias_table([("Took", "Pippin")])
    assert extract_mentions(corpus_for("He took it. Took ran.", table), table)[0].token_start == 4


def test_alias_order_does_not_matter(fixture_corpus):
    rows = [("Frodo Baggins", "Frodo"), ("Mr. Frodo", "Frodo"), ("Samwise", "Sam"), ("Gandalf", "Gandalf"),
            ("Mithrandir", "Gandalf"), ("Bilbo", "Bilbo"), ("Strider-the-Ranger", "Aragorn")]
    base = extract_mentions(fixture_corpus, compile_alias_table(rows))
    rng = random.Random(3)
    for _ in range(5):
        rng.shuffle(rows)
        assert extract_mentions(fixture_corpus, compile_alias_table(rows)) == base


def test_mention_surfaces_are_registered_aliases(fixture_corpus, fixture_aliases, fixture_mentions):
    for m in fixture_mentions:
        surface = tuple(fixture_corpus.surfaces[m.token_start : m.token_end])
        assert fixture_aliases.resolve(surface) == m.canonical_id
        s0, s1 = fixture_corpus.sentences[m.sentence_index]
        assert s0 <= m.token_start and m.token_end <= s1
        ch = fixture_corpus.chapters[m.chapter_index]
        assert ch.start <= s0 and s1 <= ch.end


def test_extraction_is_idempotent(fixture_corpus, fixture_aliases, fixture_mentions):
    assert extract_mentions(fixture_corpus, fixture_aliases) == fixture_mentions
    assert fixture_mentions == sorted(fixture_mentions)


def test_pronoun_count():
    table = compile_alias_table([("Frodo", "Frodo")])
    stats = count_mention_types(corpus_for("He saw her.", table), table)
    assert stats["w"].pronoun_token_count == 2
    assert stats["w"].nominal_mention_count is None
    assert "nominal_mention_count" not in stats["w"].to_dict()


def test_nominal_lexicon_counts_phrases():
    table = compile_alias_table([("Frodo", "Frodo")])
    stats = count_mention_types(corpus_for("The hobbit ran. Frodo, the hobbit, hid.", table), table,
                                nominal_lexicon=["the hobbit"])
    assert stats["w"].nominal_mention_count == 2


def test_fixture_counts_match_gold(fixture_corpus, fixture_aliases, fixture_mentions, gold_dir):
    import json

    gold = json.loads((gold_dir / "fixture_mention_counts.json").read_text())
    stats = count_mention_types(fixture_corpus, fixture_aliases)["fixture"]
    assert stats.explicit_named_mentions == sum(gold["all"].values()) == len(fixture_mentions)
    assert stats.token_count == len(fixture_corpus.tokens)
    assert stats.cooccurrence_count == 14  # sum of gold edge weights
    assert stats.pronoun_token_count == gold["pronoun_tokens"]  # them, me, his


def test_chart_single_character_chapter():
    table = compile_alias_table([("A", "A"), ("B", "B")])
    c = corpus_for("A. A. A. A. A.", table)
    chart = narrative_chart(extract_mentions(c, table), ["A", "B"], c, known_ids=table.canonical_ids)
    assert chart.matrix[:, 0].tolist() == [1.0, 0.0]


def test_chart_equal_mentions():
    table = compile_alias_table([("A", "A"), ("B", "B")])
    c = corpus_for("A B. A B. A B. A B. A B.", table)
    chart = narrative_chart(extract_mentions(c, table), ["A", "B"], c)
    assert chart.matrix[:, 0].tolist() == [0.5, 0.5]


def test_chart_ignores_dialogue_only_characters():
    table = compile_alias_table([("A", "A"), ("B", "B")])
    c = corpus_for('A ran. "B!" A said.', table)
    chart = narrative_chart(extract_mentions(c, table), ["A", "B"], c)
    assert chart.matrix[:, 0].tolist() == [1.0, 0.0]


def test_chart_unknown_id_is_named(fixture_corpus, fixture_mentions, fixture_aliases):
    with pytest.raises(KeyError, match="Gollum"):
        narrative_chart(fixture_mentions, ["Frodo", "Gollum"], fixture_corpus, fixture_aliases.canonical_ids)


def test_fixture_chart_matches_gold(fixture_corpus, fixture_mentions):
    characters, columns = load_gold_chart()
    chart = narrative_chart(fixture_mentions, characters, fixture_corpus)
    expected = np.array([[float(x) for x in col] for col in columns]).T
    assert np.array_equal(chart.matrix, expected)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2), st.booleans()), max_size=40))
def test_chart_columns_sum_to_one(draws):
    table = compile_alias_table([("A", "A"), ("B", "B"), ("C", "C"), ("D", "D")])
    c = corpus_for("Chapter 1\nx.\nChapter 2\ny.\nChapter 3\nz.\n", table)
    names = "ABCD"
    mentions = [MentionRecord(0, 1, names[who], "w", 0, ch, dia) for who, ch, dia in draws]
    chart = narrative_chart(mentions, list(names), c, known_ids=names)
    for col in range(chart.matrix.shape[1]):
        total = chart.matrix[:, col].sum()
        expected = any(not d and ch == col for _, ch, d in draws)
        assert abs(total - (1.0 if expected else 0.0)) < 1e-12


def test_mentions_csv_roundtrip(tmp_path, fixture_mentions):
    path = tmp_path / "m.csv"
    write_mentions_csv(fixture_mentions, path)
    assert path.read_text().splitlines()[0] == "canonical_id,work_id,chapter,sentence,token_start,token_end,in_dialogue"
    assert read_mentions_csv(path) == fixture_mentions


def test_tolkien_table_ships_and_compiles(data_dir):
    table = read_alias_table(data_dir / "tolkien_aliases.tsv")
    assert table.resolve("Sam") == "Sam Gamgee"
    assert table.resolve("Peregrin") == "Pippin"
    assert "Uruk-hai" in table.protected_tokens
    c = load_corpus([RawDocument("t", "T", "The Uruk-hai chased Mr. Frodo and Samwise Gamgee.")],
                    table.segmentation_config())
    assert [m.canonical_id for m in extract_mentions(c, table)] == ["Uruk-hai", "Frodo Baggins", "Sam Gamgee"]


def test_json_alias_table(tmp_path):
    p = tmp_path / "a.json"
    p.write_text('{"Sam": "Sam Gamgee"}', encoding="utf-8")
    assert read_alias_table(p).resolve("Sam") == "Sam Gamgee"
