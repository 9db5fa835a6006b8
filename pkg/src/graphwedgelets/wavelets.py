"""Haar-type wavelet coefficients on wedge partitioning trees.

Every node of a tree carries one wavelet: the root carries the constant
global mean, and each split contributes a (+, -) pair of difference-of-
means functions on its two children,

    psi_plus  = (mean over plus child  - mean over parent) * indicator(plus),
    psi_minus = (mean over minus child - mean over parent) * indicator(minus).

A tree with M centers therefore yields 2M - 1 wavelets, the two members
of a pair satisfy c_plus * |plus| + c_minus * |minus| = 0, and for a
complete tree the wavelets sum back to the signal exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .tree import BwpTree

__all__ = [
    "WaveletAtom",
    "WaveletDecomposition",
    "decompose",
    "reconstruct_from_means",
    "stored_wavelet_values",
    "decomposition_from_values",
    "reconstruct_from_wavelet_values",
    "m_term_error",
    "r_energy",
    "mr_functional",
]

_SIDE_RANK = {"root": 0, "+": 0, "-": 1}


@dataclass(frozen=True)
class WaveletAtom:
    """One wavelet: a constant ``coeff`` supported on one tree node."""

    node_id: int
    level: int  # partition level at which the wavelet appears (root: 1)
    sign: str  # 'root', '+' or '-'
    center: int  # center vertex of the supporting subset
    coeff: float
    size: int

    @property
    def norm(self) -> float:
        return abs(self.coeff) * sqrt(self.size)


class WaveletDecomposition:
    """Root coefficient plus one coefficient pair per split."""

    def __init__(self, tree: BwpTree, atoms: list[WaveletAtom]):
        self.tree = tree
        self.atoms = atoms

    def __len__(self) -> int:
        return len(self.atoms)

    def norms(self) -> np.ndarray:
        return np.array([a.norm for a in self.atoms])

    def selection_order(self) -> list[int]:
        """Atom indices by descending L2 norm; equal norms order by
        (level, '+' before '-', center id) so selection is deterministic."""
        return sorted(
            range(len(self.atoms)),
            key=lambda i: (
                -self.atoms[i].norm,
                self.atoms[i].level,
                _SIDE_RANK[self.atoms[i].sign],
                self.atoms[i].center,
            ),
        )

    def split_pairs(self) -> list[tuple[WaveletAtom, WaveletAtom]]:
        """(plus, minus) atom pairs for the splits m = 2..M."""
        return [(self.atoms[2 * k + 1], self.atoms[2 * k + 2]) for k in range(self.tree.M - 1)]

    def synthesize(self, mterm: int | None = None) -> np.ndarray:
        """Sum of all wavelets, or of the ``mterm`` largest ones."""
        count = len(self.atoms)
        if mterm is None:
            mterm = count
        if not (0 <= mterm <= count):
            raise ValueError(f"mterm must be in [0, {count}], got {mterm}")
        keep = self.selection_order()[:mterm]
        out = np.zeros(self.tree.graph.n, dtype=np.float64)
        for i in keep:
            atom = self.atoms[i]
            out[self.tree.nodes[atom.node_id].members] += atom.coeff
        return out

    def residual_norm_trace(self, f: np.ndarray) -> np.ndarray:
        """||f - S_m(f)||_2 for m = 0 .. 2M-1, following the selection order.

        Computed incrementally: each added wavelet only touches its own
        support, so the squared norm is updated on that support alone.
        """
        resid = np.asarray(f, dtype=np.float64).copy()
        err_sq = float(np.sum(resid * resid))
        trace = [sqrt(max(err_sq, 0.0))]
        for i in self.selection_order():
            atom = self.atoms[i]
            sup = self.tree.nodes[atom.node_id].members
            before = float(np.sum(resid[sup] * resid[sup]))
            resid[sup] -= atom.coeff
            after = float(np.sum(resid[sup] * resid[sup]))
            err_sq = max(err_sq - before + after, 0.0)
            trace.append(sqrt(err_sq))
        return np.array(trace)


def decompose(tree: BwpTree, f: np.ndarray) -> WaveletDecomposition:
    """Wavelet coefficients of ``f`` on the given tree."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (tree.graph.n,):
        raise ValueError(f"signal length {f.shape} does not match n={tree.graph.n}")
    means = [float(np.mean(f[node.members])) for node in tree.nodes]
    root = tree.nodes[0]
    atoms = [WaveletAtom(0, 1, "root", root.center, means[0], root.size)]
    for m in range(2, tree.M + 1):
        parent, plus, minus = tree.split_record(m)
        atoms.append(
            WaveletAtom(
                plus.node_id, m, "+", plus.center,
                means[plus.node_id] - means[parent.node_id], plus.size,
            )
        )
        atoms.append(
            WaveletAtom(
                minus.node_id, m, "-", minus.center,
                means[minus.node_id] - means[parent.node_id], minus.size,
            )
        )
    return WaveletDecomposition(tree, atoms)


def reconstruct_from_means(tree: BwpTree, leaf_means: np.ndarray) -> np.ndarray:
    """Paint each leaf subset with its mean (the piecewise-constant decode)."""
    leaf_means = np.asarray(leaf_means, dtype=np.float64)
    if len(leaf_means) != tree.M:
        raise ValueError(f"expected {tree.M} leaf means, got {len(leaf_means)}")
    out = np.empty(tree.graph.n, dtype=np.float64)
    for mean, members in zip(leaf_means, tree.leaf_sets()):
        out[members] = mean
    return out


def stored_wavelet_values(decomp: WaveletDecomposition) -> np.ndarray:
    """The M values a codec stores: the root coefficient, then the plus
    coefficient of each split (the minus one is derived from the support
    sizes, so storing one of the two suffices)."""
    values = [decomp.atoms[0].coeff]
    values += [plus.coeff for plus, _ in decomp.split_pairs()]
    return np.array(values, dtype=np.float64)


def decomposition_from_values(tree: BwpTree, values: np.ndarray) -> WaveletDecomposition:
    """Rebuild a full decomposition from the M stored coefficients.

    The minus coefficient of each split is recovered from the zero-sum
    relation c_plus * |plus| + c_minus * |minus| = 0.
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) != tree.M:
        raise ValueError(f"expected {tree.M} stored values, got {len(values)}")
    root = tree.nodes[0]
    atoms = [WaveletAtom(0, 1, "root", root.center, float(values[0]), root.size)]
    for m in range(2, tree.M + 1):
        _, plus, minus = tree.split_record(m)
        c_plus = float(values[m - 1])
        c_minus = -c_plus * plus.size / minus.size
        atoms.append(WaveletAtom(plus.node_id, m, "+", plus.center, c_plus, plus.size))
        atoms.append(WaveletAtom(minus.node_id, m, "-", minus.center, c_minus, minus.size))
    return WaveletDecomposition(tree, atoms)


def reconstruct_from_wavelet_values(
    tree: BwpTree, values: np.ndarray, mterm: int | None = None
) -> np.ndarray:
    """Progressive decode from stored coefficients, optionally keeping
    only the ``mterm`` wavelets of largest norm."""
    return decomposition_from_values(tree, values).synthesize(mterm)


def m_term_error(tree: BwpTree, f: np.ndarray, m: int) -> float:
    """L2 error of the m-term wavelet approximation of ``f``."""
    decomp = decompose(tree, f)
    if not (1 <= m <= len(decomp)):
        raise ValueError(f"m must be in [1, {len(decomp)}], got {m}")
    diff = np.asarray(f, dtype=np.float64) - decomp.synthesize(m)
    return float(np.linalg.norm(diff))


def r_energy(tree: BwpTree, f: np.ndarray, r: float) -> float:
    """l^r aggregate of the wavelet L2 norms over the whole tree."""
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    norms = decompose(tree, f).norms()
    return float(np.sum(norms**r) ** (1.0 / r))


def _sup_oscillation(values: np.ndarray, r: float, chunk: int = 512) -> float:
    """max over w of sum over v of |values[v] - values[w]|^r."""
    best = 0.0
    for lo in range(0, len(values), chunk):
        block = values[lo : lo + chunk]
        osc = np.abs(values[None, :] - block[:, None]) ** r
        best = max(best, float(osc.sum(axis=1).max()))
    return best


def mr_functional(tree: BwpTree, f: np.ndarray, alpha: float, r: float) -> float:
    """Size-weighted oscillation functional over all tree nodes.

    Requires the smoothness/integrability coupling 1/r = alpha + 1/2.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if abs(1.0 / r - (alpha + 0.5)) > 1e-9:
        raise ValueError(f"need 1/r = alpha + 1/2, got alpha={alpha}, r={r}")
    f = np.asarray(f, dtype=np.float64)
    total = 0.0
    for node in tree.nodes:
        if node.size < 2:
            continue  # single-point sets have zero oscillation
        total += node.size ** (-alpha * r) * _sup_oscillation(f[node.members], r)
    return float(total ** (1.0 / r))
