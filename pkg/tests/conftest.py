import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

import pytest

from charnet.characters import extract_mentions, read_alias_table
from charnet.corpus import load_corpus, read_manifest

GOLD = Path(__file__).parent / "gold"
DATA = Path(str(resources.files("charnet") / "data"))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def gold_dir() -> Path:
    return GOLD


@pytest.fixture(scope="session")
def fixture_aliases():
    return read_alias_table(DATA / "fixture_aliases.tsv")


@pytest.fixture(scope="session")
def fixture_corpus(fixture_aliases):
    return load_corpus(read_manifest(DATA / "fixture_manifest.json"), fixture_aliases.segmentation_config())


@pytest.fixture(scope="session")
def fixture_mentions(fixture_corpus, fixture_aliases):
    return extract_mentions(fixture_corpus, fixture_aliases)


def load_gold_chart():
    data = json.loads((GOLD / "fixture_chart.json").read_text(encoding="utf-8"))
    columns = [[Fraction(x) for x in col] for col in data["columns"]]
    return data["characters"], columns


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
