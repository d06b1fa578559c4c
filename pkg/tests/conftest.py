import numpy as np
import pytest

from hostquality.hostgraph import build_graph


def random_graph(rng, n, m, max_count=4):
    """Seeded random multigraph on hosts h000..h{n-1}, every host present."""
    hosts = [f"h{i:03d}" for i in range(n)]
    pairs = rng.integers(0, n, size=(m, 2))
    counts = rng.integers(1, max_count + 1, size=m)
    edges = [(hosts[a], hosts[b], int(c)) for (a, b), c in zip(pairs, counts)]
    return build_graph(edges, hosts=hosts)


@pytest.fixture
def chain():
    """a -> b -> c with counts 2 and 3."""
    return build_graph([("a", "b", 2), ("b", "c", 3)])


@pytest.fixture
def rng():
    return np.random.default_rng(20100920)
