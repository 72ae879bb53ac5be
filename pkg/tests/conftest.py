from pathlib import Path

import pytest

from tableseek import (
    default_entity_name_lexicon,
    default_superlative_lexicon,
    default_type_dictionary,
)
from tableseek.evaluation import read_labeled_queries
from tableseek.tables import extract_tables

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def td():
    return default_type_dictionary()


@pytest.fixture(scope="session")
def sl():
    return default_superlative_lexicon()


@pytest.fixture(scope="session")
def el():
    return default_entity_name_lexicon()


@pytest.fixture(scope="session")
def labeled_corpus():
    return read_labeled_queries(FIXTURES / "labeled_queries.tsv")


@pytest.fixture(scope="session")
def filmography_tables(corpus_dir):
    html = (corpus_dir / "filmography.html").read_text(encoding="utf-8")
    tables = extract_tables(
        html, url="http://example.org/tom-cruise-movies", title="Tom Cruise Movies"
    )
    assert len(tables) == 2
    return tables


@pytest.fixture(scope="session")
def film_table(filmography_tables):
    return filmography_tables[0]


@pytest.fixture(scope="session")
def coactor_table(filmography_tables):
    return filmography_tables[1]
