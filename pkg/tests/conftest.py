import numpy as np
import pytest

from avcstein.report import builtin_example


@pytest.fixture(scope="session")
def bec():
    return builtin_example("bec", p=0.5, r=0.25)


@pytest.fixture(scope="session")
def sep():
    return builtin_example("sep")


@pytest.fixture(scope="session")
def bsc():
    return builtin_example("bsc", p0=0.1, p1=0.3)


def corpus_pairs(count=200, master_seed=1234):
    """Seeded random pairs with all alphabets of size at most 3."""
    rng = np.random.default_rng(master_seed)
    pairs = []
    for i in range(count):
        nx, ny = rng.integers(2, 4, size=2)
        ns0, ns1 = rng.integers(1, 4, size=2)
        pairs.append(
            builtin_example(
                "random",
                seed=10_000 + i,
                nx=int(nx),
                ny=int(ny),
                ns0=int(ns0),
                ns1=int(ns1),
            )
        )
    return pairs


@pytest.fixture(scope="session")
def corpus():
    return corpus_pairs()
