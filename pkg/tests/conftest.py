import random

import pytest

from nimsa.pairing import setup


@pytest.fixture(scope="session")
def suite():
    """Fast curve profile shared by the whole test session."""
    return setup("test", 0)


@pytest.fixture()
def rng():
    return random.Random(20260823)
