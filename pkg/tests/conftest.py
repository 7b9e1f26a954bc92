from importlib import resources

import pytest

from signphon.corpus import parse_corpus
from signphon.inventory import load_default_inventory
from signphon.lexicon import load_default_lexicon
from signphon.transitions import load_shipped_stats


def _shipped(name, inv):
    with resources.files("signphon.data").joinpath(name).open(encoding="utf-8") as fh:
        return parse_corpus(fh, inv)


@pytest.fixture(scope="session")
def inv():
    return load_default_inventory()


@pytest.fixture(scope="session")
def lex(inv):
    return load_default_lexicon(inv)


@pytest.fixture(scope="session")
def chart(inv):
    return load_shipped_stats(inv)


@pytest.fixture(scope="session")
def coartic_corpus(inv):
    return _shipped("coartic_fixture.jsonl", inv)


@pytest.fixture(scope="session")
def chart_corpus(inv):
    return _shipped("chart_corpus.jsonl", inv)


@pytest.fixture(scope="session")
def scenarios(inv):
    return {u.id: u for u in _shipped("disambiguation.jsonl", inv)}


# -- acceptance verdict lines --------------------------------------------------

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
