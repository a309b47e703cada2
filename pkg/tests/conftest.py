"""Shared fixtures: tiny named graphs and a couple of prebuilt stores."""
from __future__ import annotations

import numpy as np
import pytest

from graphatlas.model import Graph, ingest_edgelist
from graphatlas.pipeline import PipelineParams, build_store


def graph_from_pairs(pairs) -> Graph:
    text = "\n".join(f"{a} {b}" for a, b in pairs)
    return ingest_edgelist(text)


def random_graph(n: int, m: int, seed: int) -> Graph:
    """Connected-ish random graph: a spanning path plus random extra pairs."""
    rng = np.random.default_rng(seed)
    pairs = {(i, i + 1) for i in range(n - 1)}
    while len(pairs) < m:
        a, b = rng.integers(0, n, 2)
        if a != b:
            pairs.add((min(int(a), int(b)), max(int(a), int(b))))
    lines = "\n".join(f"v{a} v{b}" for a, b in sorted(pairs))
    return ingest_edgelist(lines)


@pytest.fixture(scope="session")
def k4() -> Graph:
    return graph_from_pairs([(a, b) for a in "abcd" for b in "abcd" if a < b])


@pytest.fixture(scope="session")
def two_triangles() -> Graph:
    return graph_from_pairs([("a", "b"), ("b", "c"), ("c", "a"),
                             ("x", "y"), ("y", "z"), ("z", "x")])


@pytest.fixture(scope="session")
def path4() -> Graph:
    return graph_from_pairs([("a", "b"), ("b", "c"), ("c", "d")])


@pytest.fixture(scope="session")
def small_graph() -> Graph:
    return random_graph(300, 900, seed=7)


@pytest.fixture(scope="session")
def small_store(small_graph):
    """300 nodes / 900 edges in 4 partitions; shared by query/store/server tests."""
    store, report = build_store(
        small_graph, PipelineParams(k=4, iterations=80, seed=11))
    return store, report


@pytest.fixture(scope="session")
def two_part_store():
    """Two clusters of 6 joined by 3 crossing edges: the smallest store where
    both abstraction levels have something to say."""
    pairs = []
    for base in ("l", "r"):
        names = [f"{base}{i}" for i in range(6)]
        pairs += [(names[i], names[(i + 1) % 6]) for i in range(6)]
        pairs += [(names[0], names[3])]
    pairs += [("l0", "r0"), ("l2", "r4"), ("l5", "r1")]
    graph = graph_from_pairs(pairs)
    store, report = build_store(graph, PipelineParams(k=2, iterations=60, seed=5))
    return graph, store, report


@pytest.fixture(scope="session")
def tiny_store():
    """3 nodes / 2 edges, one partition."""
    graph = graph_from_pairs([("a", "b"), ("b", "c")])
    store, _ = build_store(graph, PipelineParams(k=1, iterations=40, seed=1))
    return store
