import numpy as np
import pytest

from ndrl.kg import KnowledgeGraph


@pytest.fixture
def star_kg() -> KnowledgeGraph:
    """Hub with four leaves: richness 4 + 0.5 * 4 = 6 at the center and
    1 + 0.5 * 4 = 3 at each leaf under the default k."""
    triples = [(0, 0, i) for i in range(1, 5)]
    return KnowledgeGraph(["hub", "l1", "l2", "l3", "l4"], ["touch"], triples)


@pytest.fixture
def chain_kg() -> KnowledgeGraph:
    return KnowledgeGraph(["a", "b", "c"], ["r", "s"], [(0, 0, 1), (1, 1, 2)])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
