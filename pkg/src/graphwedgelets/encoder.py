"""Signal-adaptive growth of wedge partitioning trees.

Each refinement step makes two greedy choices:

1. which current subset to split — always the one whose piecewise-constant
   approximation error is largest (singletons excluded; if every
   splittable subset has zero error, the largest one is split so that the
   tree keeps progressing toward completeness);
2. which new center to split it with, per the configured strategy:

   * ``md`` — the vertex farthest from the subset's center (signal-blind),
   * ``fa`` — the vertex minimizing the summed squared error of the two
     wedge halves, scanned over every vertex of the subset,
   * ``r``  — the same minimization over a seeded random sample of R
     vertices.

All argmin/argmax ties resolve to the smallest vertex id (or smallest
center position), which makes encodings bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .graph import Graph
from .metrics import Metric, wedge_assign
from .tree import BwpTree

__all__ = [
    "Strategy",
    "SubsetStats",
    "EncoderState",
    "EncodeResult",
    "split_cost",
    "err_from_moments",
    "encode",
    "error_curve",
]

# Relative threshold below which a subset's squared error is snapped to
# exactly 0. Keeps zero-error detection (and hence the subset-selection
# tie rule and the monotone error curve) immune to float residue when a
# subset is constant up to rounding.
ZERO_SNAP_REL = 1e-18


@dataclass(frozen=True)
class Strategy:
    """Center-proposal rule: kind 'md', 'fa', or 'r' (with sample size R)."""

    kind: str
    R: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("md", "fa", "r"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "r":
            if self.R is None or self.R < 1:
                raise ValueError("strategy 'r' needs a sample size R >= 1")
            if self.seed is None:
                raise ValueError("strategy 'r' needs an explicit seed")

    def tag(self) -> str:
        return self.kind


def err_from_moments(count: int, s: float, s2: float) -> float:
    """Squared L2 error of the best constant fit, from raw moments."""
    err = s2 - s * s / count
    if err <= ZERO_SNAP_REL * s2:
        return 0.0
    return err


@dataclass
class SubsetStats:
    """Cached first/second moments of the signal over one subset."""

    size: int
    total: float
    total_sq: float
    err: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "SubsetStats":
        s = float(np.sum(values))
        s2 = float(np.sum(values * values))
        return cls(len(values), s, s2, err_from_moments(len(values), s, s2))

    @property
    def mean(self) -> float:
        return self.total / self.size


def split_cost(
    metric: Metric, f: np.ndarray, members: np.ndarray, q_j: int, q: int
) -> float:
    """Summed squared error of the two wedge halves of ``members`` when
    split by the anchor pair (q_j, q)."""
    if q == q_j:
        raise ValueError("candidate center equals the subset's center")
    plus, minus = wedge_assign(metric, members, q_j, q)
    return (
        SubsetStats.from_values(f[plus]).err + SubsetStats.from_values(f[minus]).err
    )


class EncoderState:
    """Tree under construction plus the per-subset moment caches.

    Single-writer: one encoding job drives one state. The candidate scans
    inside :meth:`propose_center` only read shared data.
    """

    def __init__(self, graph: Graph, metric: Metric, f: np.ndarray, q1: int, strategy: Strategy):
        f = np.asarray(f, dtype=np.float64)
        if f.shape != (graph.n,):
            raise ValueError(f"signal length {f.shape} does not match n={graph.n}")
        if not np.all(np.isfinite(f)):
            raise ValueError("signal contains non-finite values")
        self.f = f
        self.strategy = strategy
        self.tree = BwpTree(graph, metric, q1)
        self.subset_stats: list[SubsetStats] = [SubsetStats.from_values(f)]
        self.total_sq_err = self.subset_stats[0].err
        self.rng = np.random.default_rng(strategy.seed) if strategy.kind == "r" else None
        self.work = {"candidate_evals": 0, "value_touches": 0}

    # -- greedy subset selection -------------------------------------------

    def select_subset(self) -> int:
        """Center position of the next subset to split."""
        best_j, best_err = -1, -1.0
        for j, st in enumerate(self.subset_stats):
            if st.size >= 2 and st.err > best_err:
                best_j, best_err = j, st.err
        if best_j < 0:
            raise InvariantError("all subsets are singletons; encoding finished")
        if best_err > 0.0:
            return best_j
        # All splittable subsets are exactly constant: split the largest.
        best_j, best_size = -1, 1
        for j, st in enumerate(self.subset_stats):
            if st.size >= 2 and st.size > best_size:
                best_j, best_size = j, st.size
        return best_j

    # -- center proposal ------------------------------------------------------

    def propose_center(self, j: int) -> int:
        node = self.tree.node_of_leaf(j)
        if node.size < 2:
            raise InvariantError("cannot propose a center inside a singleton")
        members = node.members
        q_j = self.tree.centers[j]
        if self.strategy.kind == "md":
            return self._propose_md(members, q_j)
        candidates = members[members != q_j]
        if self.strategy.kind == "r":
            k = min(int(self.strategy.R), len(candidates))
            candidates = np.sort(self.rng.choice(candidates, size=k, replace=False))
        return self._propose_min_cost(members, q_j, candidates)

    def _propose_md(self, members: np.ndarray, q_j: int) -> int:
        dist = self.tree.metric.subset_distances(q_j, members)
        dist = np.where(members == q_j, -np.inf, dist)
        self.work["candidate_evals"] += 1
        self.work["value_touches"] += len(members)
        return int(members[np.argmax(dist)])

    def _propose_min_cost(
        self, members: np.ndarray, q_j: int, candidates: np.ndarray
    ) -> int:
        """Argmin of the split cost over ``candidates`` (ascending ids, so
        the first minimum wins ties).

        Per-candidate costs are computed with exactly the same gather+sum
        arithmetic as :func:`split_cost`, so an exhaustive rescan with that
        function reproduces these values bit for bit.
        """
        metric = self.tree.metric
        vals = self.f[members]
        vals_sq = vals * vals
        da = metric.subset_distances(q_j, members)
        best_q, best_cost = -1, np.inf
        chunk = max(1, 4_000_000 // max(len(members), 1))
        for lo in range(0, len(candidates), chunk):
            batch = candidates[lo : lo + chunk]
            db_rows = metric.subset_rows(list(batch), members)
            for q, db in zip(batch, db_rows):
                mask = da <= db
                cost = self._masked_cost(vals, vals_sq, mask)
                if cost < best_cost:
                    best_q, best_cost = int(q), cost
        self.work["candidate_evals"] += len(candidates)
        self.work["value_touches"] += len(candidates) * len(members)
        return best_q

    @staticmethod
    def _masked_cost(vals: np.ndarray, vals_sq: np.ndarray, mask: np.ndarray) -> float:
        plus, minus = vals[mask], vals[~mask]
        e_plus = err_from_moments(
            len(plus), float(np.sum(plus)), float(np.sum(vals_sq[mask]))
        )
        e_minus = err_from_moments(
            len(minus), float(np.sum(minus)), float(np.sum(vals_sq[~mask]))
        )
        return e_plus + e_minus

    # -- refinement --------------------------------------------------------

    def refine_with(self, j: int, q_new: int) -> None:
        """Split subset j by (its center, q_new) and update the caches."""
        self.tree.refine(j, q_new)
        _, plus, minus = self.tree.split_record(self.tree.M)
        plus_stats = SubsetStats.from_values(self.f[plus.members])
        minus_stats = SubsetStats.from_values(self.f[minus.members])
        self.subset_stats[j] = plus_stats
        self.subset_stats.append(minus_stats)
        # Splitting can only shed error; taking the min against a fresh
        # sum keeps the running total monotone under float residue and
        # lands it at exactly 0 once every leaf is constant.
        fresh = sum(st.err for st in self.subset_stats)
        self.total_sq_err = min(self.total_sq_err, fresh)

    def leaf_means(self) -> np.ndarray:
        return np.array([st.mean for st in self.subset_stats], dtype=np.float64)


@dataclass
class EncodeResult:
    tree: BwpTree
    leaf_means: np.ndarray
    error_trace: np.ndarray  # ||f - (level-m approximation)||_2 for m = 1..M
    completed: bool  # False if growth stopped early on an all-singleton partition
    work: dict

    @property
    def centers(self) -> list[int]:
        return self.tree.centers


def encode(
    graph: Graph,
    metric: Metric,
    f: np.ndarray,
    q1: int,
    M: int,
    strategy: Strategy,
) -> EncodeResult:
    """Grow an M-center tree adapted to ``f`` and return it with the leaf
    means (the piecewise-constant code of the signal)."""
    if not (1 <= M <= graph.n):
        raise ValueError(f"M must be in [1, n]={graph.n}, got {M}")
    state = EncoderState(graph, metric, f, q1, strategy)
    trace = [np.sqrt(state.total_sq_err)]
    completed = True
    for _ in range(2, M + 1):
        try:
            j = state.select_subset()
        except InvariantError:
            completed = False  # unreachable for M <= n; kept as a guard
            break
        state.refine_with(j, state.propose_center(j))
        trace.append(np.sqrt(state.total_sq_err))
    return EncodeResult(
        tree=state.tree,
        leaf_means=state.leaf_means(),
        error_trace=np.array(trace),
        completed=completed,
        work=dict(state.work),
    )


def error_curve(
    graph: Graph,
    metric: Metric,
    f: np.ndarray,
    q1: int,
    strategies: list[Strategy],
    m_max: int,
) -> dict[str, np.ndarray]:
    """Approximation error ||f - W_m f||_2 for m = 1..m_max, per strategy."""
    curves = {}
    for strategy in strategies:
        result = encode(graph, metric, f, q1, m_max, strategy)
        curves[strategy.tag()] = result.error_trace
    return curves
