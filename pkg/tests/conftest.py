from pathlib import Path

import pytest

from curriculum_lm import fixture_dir
from curriculum_lm.annotations import load_annotations
from curriculum_lm.corpus import Corpus, load_corpus

FIXTURES = Path(__file__).parent / "fixtures"


def toy_corpus(*lines: str) -> Corpus:
    return Corpus.from_lines(lines, unit="line")


@pytest.fixture
def tiny3() -> Corpus:
    """The three-sample corpus used throughout the worked examples."""
    return toy_corpus("a a b", "a b", "c")


@pytest.fixture(scope="session")
def fixture_train() -> Corpus:
    return load_corpus(fixture_dir() / "train.txt", "line")


@pytest.fixture(scope="session")
def fixture_valid() -> Corpus:
    return load_corpus(fixture_dir() / "valid.txt", "line")


@pytest.fixture(scope="session")
def fixture_annotations(fixture_train):
    return load_annotations(fixture_dir() / "train.annotations.jsonl", fixture_train)
