"""Vertex distance evaluation and the elementary wedge assignment.

A :class:`Metric` binds a distance kind to one graph:

* ``hop``    — unweighted shortest-path length,
* ``wpath``  — weighted shortest-path length,
* ``l1`` / ``l2`` / ``linf`` — the named norm of the coordinate difference
  (requires vertex coordinates; ignores edges entirely).

Path metrics precompute an all-pairs table once when the graph is small
enough; larger graphs fall back to per-query single/two-source searches.
By default distances inside a vertex subset are still measured on the
whole graph. With ``induced=True`` the shortest paths are recomputed
inside the subset's induced subgraph instead, which keeps the two halves
of every wedge split connected for path metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import InvariantError
from .graph import Graph

__all__ = ["Metric", "METRIC_KINDS", "wedge_assign"]

METRIC_KINDS = ("hop", "wpath", "l1", "l2", "linf")
_PATH_KINDS = ("hop", "wpath")

# Largest n for which the n x n all-pairs distance table is precomputed.
APSP_THRESHOLD = 4096


@dataclass
class Metric:
    """Distance evaluator of a fixed kind, bound to one graph."""

    graph: Graph
    kind: str
    induced: bool = False
    table_threshold: int = APSP_THRESHOLD
    _table: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind not in _PATH_KINDS and self.graph.coords is None:
            raise InvariantError(
                f"metric {self.kind!r} needs vertex coordinates, graph has none"
            )

    # -- internal helpers ------------------------------------------------

    def _full_table(self) -> np.ndarray | None:
        if self.kind not in _PATH_KINDS or self.graph.n > self.table_threshold:
            return None
        if self._table is None:
            self._table = dijkstra(
                self.graph.csr(),
                directed=False,
                unweighted=(self.kind == "hop"),
            )
        return self._table

    def _rows_global(self, sources: list[int]) -> np.ndarray:
        """Distances from each source to every vertex, on the whole graph."""
        table = self._full_table()
        if table is not None:
            return table[sources]
        return dijkstra(
            self.graph.csr(),
            directed=False,
            indices=sources,
            unweighted=(self.kind == "hop"),
        )

    def _rows_induced(self, sources: list[int], members: np.ndarray) -> np.ndarray:
        """Distances inside the subgraph induced by ``members``.

        Unreachable vertices come back as +inf; callers treat inf
        consistently in comparisons.
        """
        sub = self.graph.csr()[members][:, members]
        local = np.searchsorted(members, sources)
        return dijkstra(
            sub, directed=False, indices=local, unweighted=(self.kind == "hop")
        )

    def _coord_rows(self, sources: list[int], members: np.ndarray) -> np.ndarray:
        coords = self.graph.coords
        diff = coords[np.asarray(members)][None, :, :] - coords[sources][:, None, :]
        if self.kind == "l1":
            return np.abs(diff).sum(axis=2)
        if self.kind == "l2":
            return np.sqrt((diff * diff).sum(axis=2))
        return np.abs(diff).max(axis=2)

    # -- public API ------------------------------------------------------

    def distance(self, u: int, v: int) -> float:
        """Distance between two vertices under the global metric."""
        n = self.graph.n
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"vertex ids ({u},{v}) out of range for n={n}")
        if self.kind in _PATH_KINDS:
            table = self._full_table()
            if table is not None:
                return float(table[u, v])
            return float(self._rows_global([u])[0, v])
        return float(self._coord_rows([u], np.array([v]))[0, 0])

    def subset_rows(self, sources: list[int], members: np.ndarray) -> np.ndarray:
        """Distance rows, one per source, restricted to ``members``.

        This is the evaluation primitive behind wedge splits; it honors
        the metric's ``induced`` flag. Each row is computed independently
        of the others, so batching sources never changes a value.
        """
        members = np.asarray(members)
        if self.kind not in _PATH_KINDS:
            return self._coord_rows(sources, members)
        if self.induced:
            return self._rows_induced(sources, members)
        return self._rows_global(sources)[:, members]

    def subset_distances(self, source: int, members: np.ndarray) -> np.ndarray:
        """Distances from ``source`` to each member of a subset."""
        return self.subset_rows([source], members)[0]

    def subset_pair_distances(
        self, a: int, b: int, members: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Distances from the two anchors ``a`` and ``b`` to every member."""
        rows = self.subset_rows([a, b], members)
        return rows[0], rows[1]


def wedge_assign(
    metric: Metric, members: np.ndarray, v_plus: int, v_minus: int
) -> tuple[np.ndarray, np.ndarray]:
    """Split a vertex subset by distance comparison to two anchors.

    The plus side collects every member at least as close to ``v_plus``
    as to ``v_minus`` (ties included); the minus side is the rest. Both
    sides are nonempty: ``v_plus`` always lands in the plus side and
    ``v_minus`` in the minus side.
    """
    members = np.asarray(members)
    if v_plus == v_minus:
        raise ValueError("wedge anchors must be distinct")
    pos = np.searchsorted(members, [v_plus, v_minus])
    for p, v in zip(pos, (v_plus, v_minus)):
        if p >= len(members) or members[p] != v:
            raise ValueError(f"anchor {v} not in subset")
    da, db = metric.subset_pair_distances(v_plus, v_minus, members)
    mask = da <= db
    plus, minus = members[mask], members[~mask]
    if len(plus) == 0 or len(minus) == 0:
        raise InvariantError("wedge split produced an empty side")
    return plus, minus
