"""Graph container, file formats and generators.

Vertices are 0-based integer ids. The adjacency is stored in CSR form
(``indptr``, ``indices``, ``weights``) and is symmetric by construction:
every undirected edge appears as two oriented arcs with equal weight.
All graphs handled here are simple (no self-loops, no duplicate edges)
and connected; both properties are checked at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import FormatError, InvariantError

__all__ = [
    "Graph",
    "load_graph",
    "save_graph",
    "load_signal",
    "save_signal",
    "gen_er_graph",
    "gen_grid_graph",
]


@dataclass(frozen=True)
class Graph:
    """Immutable simple connected graph with optional vertex coordinates.

    Attributes
    ----------
    n : int
        Number of vertices.
    indptr, indices, weights : np.ndarray
        CSR neighbor lists; ``indices[indptr[u]:indptr[u+1]]`` are the
        neighbors of ``u`` with matching positive ``weights``.
    coords : np.ndarray | None
        Optional (n, 2) array of real vertex coordinates. Required only
        by the coordinate metrics; graphs read from edge-list files do
        not carry coordinates.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    coords: np.ndarray | None = None
    _csr_cache: list = field(default_factory=list, repr=False, compare=False)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: list[tuple[int, int, float]] | list[tuple[int, int]],
        coords: np.ndarray | None = None,
    ) -> "Graph":
        """Build a graph from undirected edges, validating all invariants.

        Raises
        ------
        FormatError
            On out-of-range ids, self-loops, duplicate edges or
            non-positive weights.
        InvariantError
            If the resulting graph is not connected.
        """
        if n < 1:
            raise FormatError(f"vertex count must be >= 1, got {n}")
        seen: set[tuple[int, int]] = set()
        norm: list[tuple[int, int, float]] = []
        for e in edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if not (0 <= i < n and 0 <= j < n):
                raise FormatError(f"edge ({i},{j}) out of range for n={n}")
            if i == j:
                raise FormatError(f"self-loop at vertex {i}")
            if w <= 0 or not np.isfinite(w):
                raise FormatError(f"edge ({i},{j}) has non-positive weight {w}")
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise FormatError(f"duplicate edge ({i},{j})")
            seen.add(key)
            norm.append((key[0], key[1], w))

        src = np.empty(2 * len(norm), dtype=np.int64)
        dst = np.empty(2 * len(norm), dtype=np.int64)
        wgt = np.empty(2 * len(norm), dtype=np.float64)
        for k, (i, j, w) in enumerate(norm):
            src[2 * k], dst[2 * k], wgt[2 * k] = i, j, w
            src[2 * k + 1], dst[2 * k + 1], wgt[2 * k + 1] = j, i, w
        order = np.lexsort((dst, src))
        src, dst, wgt = src[order], dst[order], wgt[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(np.bincount(src, minlength=n))
        if coords is not None:
            coords = np.asarray(coords, dtype=np.float64)
            if coords.shape != (n, 2):
                raise FormatError(f"coords must have shape ({n}, 2), got {coords.shape}")
        g = cls(n=n, indptr=indptr, indices=dst, weights=wgt, coords=coords)
        if not g.is_connected():
            raise InvariantError("graph is not connected")
        return g

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def csr(self) -> sp.csr_matrix:
        """Scipy CSR view of the weighted adjacency (cached)."""
        if not self._csr_cache:
            m = sp.csr_matrix(
                (self.weights, self.indices, self.indptr), shape=(self.n, self.n)
            )
            self._csr_cache.append(m)
        return self._csr_cache[0]

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        ncomp, _ = connected_components(self.csr(), directed=False)
        return ncomp == 1


# ----------------------------------------------------------------------
# Edge-list and signal file formats
# ----------------------------------------------------------------------
#
# Edge list: first non-comment line is "n m", then m lines "i j [w]" with
# 0-based ids. '#' starts a comment line; blank lines are ignored.
# Signal file: n lines, one decimal float per line, in vertex order.


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((lineno, line))
    return out


def load_graph(text: str) -> Graph:
    """Parse the edge-list text format into a validated :class:`Graph`."""
    lines = _content_lines(text)
    if not lines:
        raise FormatError("empty edge-list input")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise FormatError(f"line {lineno}: header must be 'n m', got {header!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise FormatError(f"line {lineno}: non-integer header {header!r}") from exc
    if len(lines) - 1 != m:
        raise FormatError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges: list[tuple[int, int, float]] = []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) not in (2, 3):
            raise FormatError(f"line {lineno}: expected 'i j [w]', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise FormatError(f"line {lineno}: malformed edge {line!r}") from exc
        edges.append((i, j, w))
    return Graph.from_edges(n, edges)


def save_graph(graph: Graph) -> str:
    """Serialize a graph to the edge-list text format.

    Weights are written only when some edge weight differs from 1.
    """
    lines = [f"{graph.n} {graph.num_edges}"]
    weighted = bool(np.any(graph.weights != 1.0))
    for u in range(graph.n):
        for k in range(graph.indptr[u], graph.indptr[u + 1]):
            v = graph.indices[k]
            if u < v:
                if weighted:
                    lines.append(f"{u} {v} {graph.weights[k]!r}")
                else:
                    lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def load_signal(text: str, n: int) -> np.ndarray:
    """Parse a signal file: one finite float per vertex, in order."""
    lines = _content_lines(text)
    if len(lines) != n:
        raise FormatError(f"signal has {len(lines)} values, graph has {n} vertices")
    values = np.empty(n, dtype=np.float64)
    for k, (lineno, line) in enumerate(lines):
        try:
            values[k] = float(line)
        except ValueError as exc:
            raise FormatError(f"line {lineno}: malformed value {line!r}") from exc
    if not np.all(np.isfinite(values)):
        raise FormatError("signal contains non-finite values")
    return values


def save_signal(values: np.ndarray) -> str:
    return "\n".join(repr(float(v)) for v in values) + "\n"


# ----------------------------------------------------------------------
# Generators
# ----------------------------------------------------------------------


def gen_er_graph(n: int, p: float, seed: int, max_retries: int = 64) -> Graph:
    """Seeded G(n, p) sample, resampled until connected.

    Draws are taken from a single PCG64 stream seeded with ``seed``, so a
    given (n, p, seed) triple always yields the same graph. Raises
    :class:`InvariantError` if no connected sample appears within
    ``max_retries`` attempts.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"need 0 < p <= 1, got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_retries):
        mask = rng.random(len(iu)) < p
        edges = [(int(i), int(j), 1.0) for i, j in zip(iu[mask], ju[mask])]
        try:
            return Graph.from_edges(n, edges)
        except InvariantError:
            continue
    raise InvariantError(
        f"no connected G({n},{p}) sample within {max_retries} retries (seed={seed})"
    )


def gen_grid_graph(width: int, height: int) -> Graph:
    """4-neighbor rectangular grid; vertex (x, y) has id y*width + x and
    coordinates (x, y)."""
    if width < 1 or height < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {width}x{height}")
    edges: list[tuple[int, int, float]] = []
    for y in range(height):
        for x in range(width):
            u = y * width + x
            if x + 1 < width:
                edges.append((u, u + 1, 1.0))
            if y + 1 < height:
                edges.append((u, u + width, 1.0))
    xs = np.tile(np.arange(width, dtype=np.float64), height)
    ys = np.repeat(np.arange(height, dtype=np.float64), width)
    return Graph.from_edges(width * height, edges, coords=np.stack([xs, ys], axis=1))
