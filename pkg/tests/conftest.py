import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coopsql.bench import build_toy_corpus, load_dataset


@pytest.fixture(scope="session")
def toy_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy-corpus")
    build_toy_corpus(str(root))
    return str(root)


@pytest.fixture(scope="session")
def toy_bundle(toy_root):
    return load_dataset(toy_root, "toy")
