import random

import pytest

from zippir import paillier


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture(scope="session")
def sk77():
    # tiny key for exhaustive tests: m = 7 * 11 = 77
    return paillier.PaillierSecretKey(7, 11)


@pytest.fixture(scope="session")
def sk2491():
    # m = 47 * 53 = 2491, large enough for toy batched compression
    return paillier.PaillierSecretKey(47, 53)


@pytest.fixture(scope="session")
def sk768():
    _, sk = paillier.keygen(768, random.Random(768))
    return sk


@pytest.fixture(scope="session")
def sk3072():
    _, sk = paillier.keygen(3072, random.Random(3072))
    return sk
