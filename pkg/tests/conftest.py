import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _synth import make_corpus, make_lexicon_file  # noqa: E402

from vwsd import MockBackend, StaticLexicon, load_dataset  # noqa: E402


@pytest.fixture(scope="session")
def mock_backend():
    # small dimensions keep the hash-and-resize work cheap
    return MockBackend(embedding_dim=64, image_resolution=32)


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return make_corpus(root, n_samples=6, image_size=32, seed=7)


@pytest.fixture(scope="session")
def sample_set(corpus):
    return load_dataset(corpus["data"], corpus["gold"], corpus["images"])


@pytest.fixture(scope="session")
def lexicon_file(tmp_path_factory):
    return make_lexicon_file(tmp_path_factory.mktemp("lex") / "lexicon.tsv")


@pytest.fixture(scope="session")
def lexicon(lexicon_file):
    return StaticLexicon.from_file(lexicon_file)
