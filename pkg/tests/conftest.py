from __future__ import annotations

import random

import pytest

from datapact.vocabulary import load_vocabulary


@pytest.fixture(scope="session")
def vocabulary():
    return load_vocabulary()


@pytest.fixture
def rng():
    return random.Random(0xDA7A)
