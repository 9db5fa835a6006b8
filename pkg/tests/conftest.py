from __future__ import annotations

import numpy as np
import pytest

from graphwedgelets import Graph, Metric, gen_er_graph, gen_grid_graph


@pytest.fixture
def path5() -> Graph:
    return Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])


@pytest.fixture
def path5_hop(path5) -> Metric:
    return Metric(path5, "hop")


@pytest.fixture
def grid5() -> Graph:
    return gen_grid_graph(5, 5)


@pytest.fixture
def er20() -> Graph:
    return gen_er_graph(20, 0.3, seed=1234)


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def brute_force_subset_error(values: np.ndarray) -> float:
    """Two-pass reference for the squared L2 error of the mean fit."""
    mean = values.mean()
    return float(np.sum((values - mean) ** 2))
