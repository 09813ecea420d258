import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from tools import corpus  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def bump():
    return corpus.bump()


@pytest.fixture
def constant():
    return corpus.constant_example()


@pytest.fixture(scope="session")
def corpus_hamiltonians():
    return corpus.hamiltonians()


@pytest.fixture(scope="session")
def corpus_strings():
    return corpus.strings()


@pytest.fixture
def corpus_path():
    def path(name):
        return os.path.join(corpus.CORPUS_DIR, f"{name}.json")

    return path
