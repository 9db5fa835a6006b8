"""Binary wedge partitioning trees.

A tree over a graph is determined by an ordered list of center vertices
``Q = [q_0, ..., q_{M-1}]``. The first center owns the whole vertex set.
Adding center ``q_m`` locates the unique current subset containing it,
say the one owned by ``q_j``, and wedge-splits that subset by the anchor
pair ``(q_j, q_m)``: the plus half keeps ``q_j``, the minus half is
handed to ``q_m``. After all M centers the leaves form a partition of V
into M subsets, and the full binary tree has exactly 2M - 1 nodes.

Center positions are 0-based throughout: the first center has index 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError
from .graph import Graph
from .metrics import Metric, wedge_assign

__all__ = ["TreeNode", "PartitionLevel", "BwpTree", "tree_from_centers"]


@dataclass
class TreeNode:
    """One subset in the binary tree.

    ``created_at`` is the partition level m at which the subset first
    exists (root: 1). A node that gets wedge-split records the level of
    that split in ``split_at`` and its two children; until then it is a
    leaf of the tree built so far.
    """

    node_id: int
    members: np.ndarray  # sorted vertex ids
    center: int  # owning center vertex
    created_at: int
    parent: int | None = None
    sign: str | None = None  # '+' or '-' for children, None for the root
    children: tuple[int, int] | None = None
    split_at: int | None = None

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True)
class PartitionLevel:
    """The m disjoint subsets covering V after m - 1 splits, ordered by
    center position."""

    m: int
    sets: list[np.ndarray]
    centers: list[int]


class BwpTree:
    """Binary wedge partitioning tree, grown one center at a time.

    Refinement is a single-writer operation; a finished tree is treated
    as immutable and can be shared freely.
    """

    def __init__(self, graph: Graph, metric: Metric, q1: int):
        if not (0 <= q1 < graph.n):
            raise ValueError(f"initial center {q1} out of range for n={graph.n}")
        if metric.graph is not graph:
            raise ValueError("metric is bound to a different graph")
        self.graph = graph
        self.metric = metric
        self.centers: list[int] = [q1]
        # split_parent[k] = center position j whose subset was split when
        # center k+1 was added (k = 0 corresponds to partition level 2).
        self.split_parent: list[int] = []
        root = TreeNode(
            node_id=0,
            members=np.arange(graph.n, dtype=np.int64),
            center=q1,
            created_at=1,
        )
        self.nodes: list[TreeNode] = [root]
        self.leaf_node_ids: list[int] = [0]
        self._vertex_to_leaf = np.zeros(graph.n, dtype=np.int64)

    # -- basic accessors ---------------------------------------------------

    @property
    def M(self) -> int:
        """Number of centers = number of leaves = partition size."""
        return len(self.centers)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def is_complete(self) -> bool:
        return self.M == self.graph.n

    def leaf_sets(self) -> list[np.ndarray]:
        """Current partition subsets, ordered by center position."""
        return [self.nodes[i].members for i in self.leaf_node_ids]

    def leaf_of_vertex(self, v: int) -> int:
        """Center position of the current subset containing vertex v."""
        return int(self._vertex_to_leaf[v])

    def node_of_leaf(self, i: int) -> TreeNode:
        return self.nodes[self.leaf_node_ids[i]]

    # -- growth --------------------------------------------------------------

    def refine(self, j: int, q_new: int) -> None:
        """Wedge-split the subset owned by center position ``j`` using the
        new center ``q_new`` that lies inside it."""
        if not (0 <= j < self.M):
            raise ValueError(f"center position {j} out of range (M={self.M})")
        node = self.nodes[self.leaf_node_ids[j]]
        if node.size < 2:
            raise InvariantError(f"cannot split singleton subset of center {node.center}")
        if q_new == self.centers[j]:
            raise ValueError(f"new center {q_new} equals the subset's center")
        if self._vertex_to_leaf[q_new] != j:
            raise ValueError(f"new center {q_new} is not in subset {j}")
        plus, minus = wedge_assign(self.metric, node.members, self.centers[j], q_new)

        m_new = self.M + 1
        plus_id, minus_id = len(self.nodes), len(self.nodes) + 1
        self.nodes.append(
            TreeNode(plus_id, plus, node.center, m_new, node.node_id, "+")
        )
        self.nodes.append(
            TreeNode(minus_id, minus, q_new, m_new, node.node_id, "-")
        )
        node.children = (plus_id, minus_id)
        node.split_at = m_new
        self.leaf_node_ids[j] = plus_id
        self.leaf_node_ids.append(minus_id)
        self._vertex_to_leaf[minus] = self.M
        self.centers.append(q_new)
        self.split_parent.append(j)

    # -- queries --------------------------------------------------------------

    def partition_at(self, m: int) -> PartitionLevel:
        """The historical partition after m - 1 splits (1 <= m <= M)."""
        if not (1 <= m <= self.M):
            raise ValueError(f"partition level {m} out of range (M={self.M})")
        pos = {c: i for i, c in enumerate(self.centers[:m])}
        sets: list[np.ndarray | None] = [None] * m
        for node in self.nodes:
            if node.created_at <= m and (node.split_at is None or node.split_at > m):
                sets[pos[node.center]] = node.members
        return PartitionLevel(m=m, sets=sets, centers=list(self.centers[:m]))

    def balance_ratio(self) -> float:
        """Worst child/parent size imbalance over all splits, in [1/2, 1)."""
        if self.M < 2:
            raise InvariantError("balance ratio needs at least one split")
        rho = 0.0
        for node in self.nodes:
            if node.children is None:
                continue
            for cid in node.children:
                frac = self.nodes[cid].size / node.size
                rho = max(rho, frac, 1.0 - frac)
        return rho

    def wedgelet_indicator(self, m: int, i: int) -> np.ndarray:
        """0/1 vector of the subset owned by center position ``i`` at
        partition level ``m`` (0 <= i < m <= M)."""
        if not (1 <= m <= self.M):
            raise ValueError(f"partition level {m} out of range (M={self.M})")
        if not (0 <= i < m):
            raise ValueError(f"center position {i} out of range at level {m}")
        level = self.partition_at(m)
        out = np.zeros(self.graph.n, dtype=np.float64)
        out[level.sets[i]] = 1.0
        return out

    def split_record(self, m: int) -> tuple[TreeNode, TreeNode, TreeNode]:
        """(parent, plus child, minus child) of the split at level m >= 2."""
        if not (2 <= m <= self.M):
            raise ValueError(f"no split at level {m}")
        # refine() appends the children of the level-m split at fixed slots
        plus, minus = self.nodes[2 * m - 3], self.nodes[2 * m - 2]
        return self.nodes[plus.parent], plus, minus


def tree_from_centers(graph: Graph, metric: Metric, centers: list[int]) -> BwpTree:
    """Deterministically rebuild the tree encoded by an ordered center list.

    This is the decoder's core: the same (graph, metric, centers) always
    reproduces the identical tree.
    """
    if len(centers) == 0:
        raise ValueError("center list is empty")
    if len(set(centers)) != len(centers):
        raise InvariantError("center list contains repeats")
    for q in centers:
        if not (0 <= q < graph.n):
            raise InvariantError(f"center {q} out of range for n={graph.n}")
    tree = BwpTree(graph, metric, centers[0])
    for q in centers[1:]:
        j = tree.leaf_of_vertex(q)
        if tree.node_of_leaf(j).size < 2:
            raise InvariantError(f"center {q} falls in a singleton subset")
        tree.refine(j, q)
    return tree
