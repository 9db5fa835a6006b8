"""Synthetic test signals.

The indicator-style signals take values in {-1, +1} (twice a set
indicator minus one); the gradient blend adds a centered linear ramp in
the x coordinate on top of a base signal, which makes the signal
piecewise smooth instead of piecewise constant.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .graph import Graph

__all__ = [
    "halfplane_indicator",
    "ellipse_indicator",
    "gradient_blend",
    "cluster_label_signal",
    "random_signal",
]


def _require_coords(graph: Graph) -> np.ndarray:
    if graph.coords is None:
        raise ValueError("signal needs vertex coordinates, graph has none")
    return graph.coords


def halfplane_indicator(graph: Graph, threshold: float, axis: str = "x") -> np.ndarray:
    """+1 where the chosen coordinate is below the threshold, else -1."""
    coords = _require_coords(graph)
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    column = coords[:, 0] if axis == "x" else coords[:, 1]
    return np.where(column < threshold, 1.0, -1.0)


def ellipse_indicator(
    graph: Graph,
    center: tuple[float, float],
    weights: tuple[float, float],
    radius_sq: float,
) -> np.ndarray:
    """+1 inside the weighted ellipse wx*(x-cx)^2 + wy*(y-cy)^2 < r, else -1."""
    coords = _require_coords(graph)
    wx, wy = weights
    cx, cy = center
    lhs = wx * (coords[:, 0] - cx) ** 2 + wy * (coords[:, 1] - cy) ** 2
    return np.where(lhs < radius_sq, 1.0, -1.0)


def gradient_blend(graph: Graph, base: np.ndarray, alpha: float) -> np.ndarray:
    """base + alpha * (x - mean(x)): a piecewise-smooth blend."""
    coords = _require_coords(graph)
    x = coords[:, 0]
    return np.asarray(base, dtype=np.float64) + alpha * (x - x.mean())


def cluster_label_signal(graph: Graph, k: int, seed: int) -> np.ndarray:
    """Integer labels 1..k from nearest-of-k-seeds hop distance."""
    if not (1 <= k <= graph.n):
        raise ValueError(f"need 1 <= k <= n={graph.n}, got {k}")
    rng = np.random.default_rng(seed)
    sources = rng.choice(graph.n, size=k, replace=False)
    dist = dijkstra(graph.csr(), directed=False, indices=sources, unweighted=True)
    return np.argmin(dist, axis=0).astype(np.float64) + 1.0


def random_signal(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    return scale * np.random.default_rng(seed).standard_normal(n)
