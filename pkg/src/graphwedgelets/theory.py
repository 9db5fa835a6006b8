"""Desk-scale verification of the approximation theory.

Two entry points:

* :func:`jackson_check` evaluates, on a concrete complete tree, the
  m-term error decay bound with its explicit constant
  ``C = 2 (1 - rho^(1/2))^(-1/2)`` at every dyadic block of wavelet
  norms, together with the norm bound ``||f||_2 <= (C+1) N_r`` and (for
  r <= 1) the oscillation-vs-energy inequality
  ``M_r <= (rho^(a r) / (1 - rho^(a r)))^(1/r) N_r``.

* :func:`besov_oracle` computes the smoothness measure defined as an
  infimum over ALL complete, balanced binary partition trees with
  arbitrary dyadic splits (not only wedge splits), by exhaustive
  memoized enumeration over vertex subsets. Exponential in n; intended
  for n <= 8.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, sqrt

import numpy as np

from .graph import Graph
from .tree import BwpTree
from .wavelets import decompose, mr_functional, _sup_oscillation

__all__ = [
    "JacksonBlock",
    "JacksonReport",
    "jackson_check",
    "OracleNode",
    "OracleTree",
    "BesovOracleResult",
    "besov_oracle",
]

_BALANCE_EPS = 1e-9


# ----------------------------------------------------------------------
# Jackson estimate with explicit constant
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class JacksonBlock:
    mu: int
    m: int
    lhs: float  # ||f - S_m(f)||_2
    rhs: float  # C * m^(-alpha) * N_r
    ok: bool


@dataclass
class JacksonReport:
    r: float
    alpha: float
    rho: float
    constant: float
    n_wavelets: int
    nr: float
    norm_f: float
    blocks: list[JacksonBlock]
    norm_bound_ok: bool  # ||f||_2 <= (C+1) * N_r
    mr_value: float | None  # oscillation functional, only for r <= 1
    mr_bound: float | None
    mr_ok: bool | None

    @property
    def all_ok(self) -> bool:
        checks = [b.ok for b in self.blocks] + [self.norm_bound_ok]
        if self.mr_ok is not None:
            checks.append(self.mr_ok)
        return all(checks)


def jackson_check(tree: BwpTree, f: np.ndarray, r: float) -> JacksonReport:
    """Verify the dyadic-block error bounds on one complete tree.

    The comparisons allow a 1e-12 relative grace for float rounding;
    the inequalities themselves hold with large margins when they hold
    at all.
    """
    if not (0.0 < r < 2.0):
        raise ValueError(f"need 0 < r < 2, got {r}")
    if not tree.is_complete:
        raise ValueError("tree must be complete (one center per vertex)")
    alpha = 1.0 / r - 0.5
    f = np.asarray(f, dtype=np.float64)

    if tree.M < 2:  # single-vertex graph: everything is trivially exact
        rho = 0.5
    else:
        rho = tree.balance_ratio()
    constant = 2.0 / sqrt(1.0 - sqrt(rho))

    decomp = decompose(tree, f)
    norms = decomp.norms()
    nr = float(np.sum(norms**r) ** (1.0 / r))
    norm_f = float(np.linalg.norm(f))
    grace = 1.0 + 1e-12

    blocks: list[JacksonBlock] = []
    if nr > 0.0:
        trace = decomp.residual_norm_trace(f)
        nonzero = int(np.count_nonzero(norms))
        sorted_norms = np.sort(norms)[::-1]
        mu = 0
        while mu < 64:
            threshold = nr / 2.0**mu
            m = int(np.searchsorted(-sorted_norms, -threshold, side="right"))
            if m >= 1:
                lhs = float(trace[m])
                rhs = constant * m ** (-alpha) * nr
                blocks.append(JacksonBlock(mu, m, lhs, rhs, lhs <= rhs * grace))
            if m >= nonzero:
                break
            mu += 1

    norm_bound_ok = norm_f <= (constant + 1.0) * nr * grace

    mr_value = mr_bound = mr_ok = None
    if r <= 1.0:
        mr_value = mr_functional(tree, f, alpha, r)
        ratio = rho ** (alpha * r)
        mr_bound = (ratio / (1.0 - ratio)) ** (1.0 / r) * nr
        mr_ok = mr_value <= mr_bound * grace

    return JacksonReport(
        r=r,
        alpha=alpha,
        rho=rho,
        constant=constant,
        n_wavelets=len(decomp),
        nr=nr,
        norm_f=norm_f,
        blocks=blocks,
        norm_bound_ok=norm_bound_ok,
        mr_value=mr_value,
        mr_bound=mr_bound,
        mr_ok=mr_ok,
    )


# ----------------------------------------------------------------------
# Exhaustive oracle for the tree-infimum smoothness measure
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class OracleNode:
    members: tuple[int, ...]
    children: tuple[int, int] | None


@dataclass
class OracleTree:
    """A complete binary partition tree over a small vertex set."""

    n: int
    nodes: list[OracleNode]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def is_complete(self) -> bool:
        return all(
            len(node.members) == 1 for node in self.nodes if node.children is None
        )

    def balance_ratio(self) -> float:
        rho = 0.5
        for node in self.nodes:
            if node.children is None:
                continue
            for cid in node.children:
                frac = len(self.nodes[cid].members) / len(node.members)
                rho = max(rho, frac, 1.0 - frac)
        return rho


def _mask_members(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def _balanced_submasks(mask: int, size: int, rho: float) -> list[int]:
    """Submasks defining admissible dyadic splits {sub, mask - sub}.

    Only submasks containing the lowest set bit are produced, so each
    unordered split appears once.
    """
    low = mask & (-mask)
    cap = rho * size + _BALANCE_EPS
    out = []
    sub = (mask - 1) & mask
    while sub:
        if sub & low:
            a = sub.bit_count()
            if a <= cap and (size - a) <= cap:
                out.append(sub)
        sub = (sub - 1) & mask
    return out


def besov_oracle(
    graph: Graph,
    f: np.ndarray,
    alpha: float,
    r: float,
    rho: float,
    nmax: int = 8,
) -> "BesovOracleResult":
    """Exact infimum of the smoothness functional, plus the matching
    infimum of the r-energy, over all complete rho-balanced trees.

    Splits range over arbitrary bipartitions of each subset (the tree
    family is defined by set splitting alone; the graph contributes only
    its vertex count). Returns the minimizing trees alongside the two
    values; values are +inf when no admissible tree exists for ``rho``.
    """
    n = graph.n
    if n > nmax:
        raise ValueError(f"oracle limited to n <= {nmax}, got n={n}")
    if r <= 0 or alpha <= 0:
        raise ValueError(f"need alpha > 0 and r > 0, got alpha={alpha}, r={r}")
    if not (0.5 <= rho < 1.0):
        raise ValueError(f"need 1/2 <= rho < 1, got {rho}")
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (n,):
        raise ValueError(f"signal length {f.shape} does not match n={n}")

    full = (1 << n) - 1
    member_cache: dict[int, np.ndarray] = {}

    def members_of(mask: int) -> np.ndarray:
        arr = member_cache.get(mask)
        if arr is None:
            arr = np.array(_mask_members(mask), dtype=np.int64)
            member_cache[mask] = arr
        return arr

    def mean_of(mask: int) -> float:
        return float(np.mean(f[members_of(mask)]))

    gb_memo: dict[int, tuple[float, int | None]] = {}
    nr_memo: dict[int, tuple[float, int | None]] = {}

    def best_gb(mask: int) -> tuple[float, int | None]:
        hit = gb_memo.get(mask)
        if hit is not None:
            return hit
        size = mask.bit_count()
        if size == 1:
            gb_memo[mask] = (0.0, None)
            return gb_memo[mask]
        local = size ** (-alpha * r) * _sup_oscillation(f[members_of(mask)], r)
        best, best_sub = inf, None
        for sub in _balanced_submasks(mask, size, rho):
            total = best_gb(sub)[0] + best_gb(mask ^ sub)[0]
            if total < best:
                best, best_sub = total, sub
        gb_memo[mask] = (local + best, best_sub)
        return gb_memo[mask]

    def best_nr(mask: int) -> tuple[float, int | None]:
        hit = nr_memo.get(mask)
        if hit is not None:
            return hit
        size = mask.bit_count()
        if size == 1:
            nr_memo[mask] = (0.0, None)
            return nr_memo[mask]
        parent_mean = mean_of(mask)
        best, best_sub = inf, None
        for sub in _balanced_submasks(mask, size, rho):
            rest = mask ^ sub
            a, b = sub.bit_count(), rest.bit_count()
            pair = (
                abs(mean_of(sub) - parent_mean) ** r * a ** (r / 2.0)
                + abs(mean_of(rest) - parent_mean) ** r * b ** (r / 2.0)
            )
            total = pair + best_nr(sub)[0] + best_nr(rest)[0]
            if total < best:
                best, best_sub = total, sub
        nr_memo[mask] = (best, best_sub)
        return nr_memo[mask]

    def extract_tree(memo: dict[int, tuple[float, int | None]]) -> OracleTree | None:
        if memo[full][0] == inf:
            return None
        nodes: list[OracleNode] = []

        def build(mask: int) -> int:
            nid = len(nodes)
            nodes.append(OracleNode(_mask_members(mask), None))
            sub = memo[mask][1]
            if sub is not None:
                left = build(sub)
                right = build(mask ^ sub)
                nodes[nid] = OracleNode(nodes[nid].members, (left, right))
            return nid

        build(full)
        return OracleTree(n=n, nodes=nodes)

    gb_sum = best_gb(full)[0]
    gb_value = gb_sum ** (1.0 / r) if gb_sum < inf else inf
    root_term = abs(mean_of(full)) ** r * n ** (r / 2.0)
    nr_sum = best_nr(full)[0] if n > 1 else 0.0
    inf_r_energy = (root_term + nr_sum) ** (1.0 / r) if nr_sum < inf else inf

    return BesovOracleResult(
        alpha=alpha,
        r=r,
        rho=rho,
        gb_value=gb_value,
        inf_r_energy=inf_r_energy,
        gb_tree=extract_tree(gb_memo) if n > 1 else OracleTree(1, [OracleNode((0,), None)]),
        nr_tree=extract_tree(nr_memo) if n > 1 else OracleTree(1, [OracleNode((0,), None)]),
    )


@dataclass
class BesovOracleResult:
    alpha: float
    r: float
    rho: float
    gb_value: float
    inf_r_energy: float
    gb_tree: OracleTree | None
    nr_tree: OracleTree | None

    @property
    def near_best_ratio(self) -> float:
        """gb_value / inf_r_energy; reported, never asserted against an
        unknown theoretical constant."""
        if self.inf_r_energy == 0.0:
            return 1.0 if self.gb_value == 0.0 else inf
        return self.gb_value / self.inf_r_energy
