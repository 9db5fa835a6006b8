"""Image <-> graph-signal adapters, quality metrics and the two
block-based comparison baselines (greedy quadtree, dyadic 2D Haar).

All pixel data is grayscale in [0, 255]. PGM (binary P5, maxval 255) is
read and written natively; other formats go through Pillow when it is
installed, with color inputs reduced by standard luminance weighting.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import err_from_moments
from .errors import FormatError
from .graph import Graph, gen_grid_graph
from .tree import BwpTree

__all__ = [
    "GrayImage",
    "read_pgm",
    "write_pgm",
    "read_image",
    "image_to_signal",
    "signal_to_image",
    "psnr",
    "QuadNode",
    "QuadTree",
    "quadtree_encode",
    "haar2d_forward",
    "haar2d_inverse",
    "haar2d_topm",
    "render_partition",
    "render_details",
]


@dataclass(frozen=True)
class GrayImage:
    """Row-major grayscale intensities in [0, 255]."""

    pixels: np.ndarray  # shape (height, width), float64

    def __post_init__(self) -> None:
        p = self.pixels
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"need a 2-D image with positive extent, got {p.shape}")
        if not np.all(np.isfinite(p)) or p.min() < 0 or p.max() > 255:
            raise ValueError("pixel values must be finite and within [0, 255]")

    @classmethod
    def from_array(cls, arr: np.ndarray, clip: bool = False) -> "GrayImage":
        arr = np.asarray(arr, dtype=np.float64)
        if clip:
            arr = np.clip(arr, 0.0, 255.0)
        return cls(arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


# ----------------------------------------------------------------------
# File I/O
# ----------------------------------------------------------------------


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) PGM with maxval 255."""
    header = re.match(
        rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s",
        data,
    )
    if header is None:
        raise FormatError("not a binary PGM (P5) header")
    width, height, maxval = (int(g) for g in header.groups())
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxval}")
    raster = data[header.end() :]
    if len(raster) < width * height:
        raise FormatError("PGM raster shorter than width*height")
    pixels = np.frombuffer(raster[: width * height], dtype=np.uint8)
    return GrayImage(pixels.reshape(height, width).astype(np.float64))


def write_pgm(image: GrayImage) -> bytes:
    body = np.rint(image.pixels).astype(np.uint8).tobytes()
    return f"P5\n{image.width} {image.height}\n255\n".encode() + body


def read_image(path: str | Path) -> GrayImage:
    """Read PGM natively; defer other formats to Pillow if available."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path.read_bytes())
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on extras
        raise FormatError(
            f"reading {path.suffix} files needs Pillow (pip install graph-wedgelets[png])"
        ) from exc
    with Image.open(path) as img:
        return GrayImage(np.asarray(img.convert("L"), dtype=np.float64))


# ----------------------------------------------------------------------
# Graph adapters and quality metric
# ----------------------------------------------------------------------


def image_to_signal(image: GrayImage) -> tuple[Graph, np.ndarray]:
    """4-neighbor pixel grid with coordinates, plus the intensity signal.

    Pixel (x, y) becomes vertex y*width + x, so coordinate metrics see
    the image geometry directly.
    """
    graph = gen_grid_graph(image.width, image.height)
    return graph, image.pixels.reshape(-1).astype(np.float64)


def signal_to_image(values: np.ndarray, width: int, height: int, clip: bool = True) -> GrayImage:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (width * height,):
        raise ValueError(f"signal length {values.shape} != {width}x{height}")
    return GrayImage.from_array(values.reshape(height, width), clip=clip)


def psnr(original: GrayImage, approx: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    if original.pixels.shape != approx.pixels.shape:
        raise ValueError("image dimensions differ")
    diff = original.pixels - approx.pixels
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


# ----------------------------------------------------------------------
# Greedy quadtree baseline
# ----------------------------------------------------------------------


@dataclass
class QuadNode:
    x: int
    y: int
    w: int
    h: int
    mean: float
    err: float
    children: list[int] | None = None


@dataclass
class QuadTree:
    width: int
    height: int
    nodes: list[QuadNode]

    def leaf_ids(self) -> list[int]:
        return [i for i, node in enumerate(self.nodes) if node.children is None]

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_ids())

    def to_image(self) -> GrayImage:
        out = np.empty((self.height, self.width), dtype=np.float64)
        for i in self.leaf_ids():
            node = self.nodes[i]
            out[node.y : node.y + node.h, node.x : node.x + node.w] = node.mean
        return GrayImage.from_array(out, clip=True)


def _block_stats(pixels: np.ndarray, x: int, y: int, w: int, h: int) -> tuple[float, float]:
    block = pixels[y : y + h, x : x + w]
    s = float(block.sum())
    s2 = float((block * block).sum())
    return s / (w * h), err_from_moments(w * h, s, s2)


def quadtree_encode(image: GrayImage, target_blocks: int) -> QuadTree:
    """Repeatedly quadsplit the worst leaf until the leaf count reaches
    the target or every leaf is exactly constant.

    Odd extents split as ceil/floor; blocks that are one pixel wide or
    tall split two ways instead of four.
    """
    pixels = image.pixels
    npixels = image.width * image.height
    if not (1 <= target_blocks <= npixels):
        raise ValueError(f"target blocks must be in [1, {npixels}], got {target_blocks}")
    mean, err = _block_stats(pixels, 0, 0, image.width, image.height)
    tree = QuadTree(image.width, image.height, [QuadNode(0, 0, image.width, image.height, mean, err)])
    leaves = {0}
    while len(leaves) < target_blocks:
        worst = max(leaves, key=lambda i: (tree.nodes[i].err, -i))
        node = tree.nodes[worst]
        if node.err == 0.0:
            break  # all remaining leaves are constant; nothing to gain
        xs = [(node.x, node.w)] if node.w == 1 else [
            (node.x, (node.w + 1) // 2),
            (node.x + (node.w + 1) // 2, node.w // 2),
        ]
        ys = [(node.y, node.h)] if node.h == 1 else [
            (node.y, (node.h + 1) // 2),
            (node.y + (node.h + 1) // 2, node.h // 2),
        ]
        node.children = []
        for y0, hh in ys:
            for x0, ww in xs:
                mean, err = _block_stats(pixels, x0, y0, ww, hh)
                node.children.append(len(tree.nodes))
                tree.nodes.append(QuadNode(x0, y0, ww, hh, mean, err))
        leaves.discard(worst)
        leaves.update(node.children)
    return tree


# ----------------------------------------------------------------------
# Dyadic 2D Haar baseline
# ----------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def _pad_pow2(pixels: np.ndarray) -> np.ndarray:
    h, w = pixels.shape
    hp = 1 << (h - 1).bit_length() if h > 1 else 1
    wp = 1 << (w - 1).bit_length() if w > 1 else 1
    out = np.zeros((hp, wp), dtype=np.float64)
    out[:h, :w] = pixels
    return out


def haar_levels(height: int, width: int, cap: int = 6) -> int:
    hp = (height - 1).bit_length() if height > 1 else 0
    wp = (width - 1).bit_length() if width > 1 else 0
    return min(cap, hp, wp)


def haar2d_forward(padded: np.ndarray, levels: int) -> np.ndarray:
    """Orthonormal separable Haar transform, in place on a copy."""
    a = padded.copy()
    h, w = a.shape
    for _ in range(levels):
        rows = a[:h, :w]
        lo = (rows[:, 0::2] + rows[:, 1::2]) / _SQRT2
        hi = (rows[:, 0::2] - rows[:, 1::2]) / _SQRT2
        a[:h, : w // 2], a[:h, w // 2 : w] = lo, hi
        cols = a[:h, :w]
        lo = (cols[0::2, :] + cols[1::2, :]) / _SQRT2
        hi = (cols[0::2, :] - cols[1::2, :]) / _SQRT2
        a[: h // 2, :w], a[h // 2 : h, :w] = lo, hi
        h, w = h // 2, w // 2
    return a


def haar2d_inverse(coeffs: np.ndarray, levels: int) -> np.ndarray:
    a = coeffs.copy()
    hs, ws = a.shape
    dims = [(hs >> k, ws >> k) for k in range(levels + 1)]
    for h, w in reversed(dims[:-1]):
        lo, hi = a[: h // 2, :w].copy(), a[h // 2 : h, :w].copy()
        cols = np.empty((h, w), dtype=np.float64)
        cols[0::2, :] = (lo + hi) / _SQRT2
        cols[1::2, :] = (lo - hi) / _SQRT2
        a[:h, :w] = cols
        lo, hi = a[:h, : w // 2].copy(), a[:h, w // 2 : w].copy()
        rows = np.empty((h, w), dtype=np.float64)
        rows[:, 0::2] = (lo + hi) / _SQRT2
        rows[:, 1::2] = (lo - hi) / _SQRT2
        a[:h, :w] = rows
    return a


def haar2d_topm(image: GrayImage, m: int) -> GrayImage:
    """Keep the m largest-magnitude Haar coefficients, invert and crop."""
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    padded = _pad_pow2(image.pixels)
    levels = haar_levels(*padded.shape)
    coeffs = haar2d_forward(padded, levels)
    flat = coeffs.reshape(-1)
    keep = min(m, flat.size)
    order = np.argsort(-np.abs(flat), kind="stable")[:keep]
    kept = np.zeros_like(flat)
    kept[order] = flat[order]
    restored = haar2d_inverse(kept.reshape(coeffs.shape), levels)
    return GrayImage.from_array(
        restored[: image.height, : image.width], clip=True
    )


# ----------------------------------------------------------------------
# Rendering helpers
# ----------------------------------------------------------------------


def render_partition(tree: BwpTree, width: int, height: int) -> GrayImage:
    """Grayscale label image of the tree's leaf partition on a pixel grid."""
    if tree.graph.coords is None or tree.graph.n != width * height:
        raise ValueError(
            f"tree graph is not a {width}x{height} pixel grid "
            f"(n={tree.graph.n}, coords={'yes' if tree.graph.coords is not None else 'no'})"
        )
    labels = np.empty(tree.graph.n, dtype=np.float64)
    for i, members in enumerate(tree.leaf_sets()):
        labels[members] = i
    if tree.M > 1:
        labels *= 255.0 / (tree.M - 1)
    return GrayImage.from_array(np.rint(labels).reshape(height, width))


def render_details(a: GrayImage, b: GrayImage) -> GrayImage:
    """Absolute difference of two reconstructions, clipped to pixel range."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError("image dimensions differ")
    return GrayImage.from_array(np.abs(a.pixels - b.pixels), clip=True)
