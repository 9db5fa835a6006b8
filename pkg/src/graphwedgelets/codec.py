"""Quantized bitstream serialization of encoded signals.

Stream layout (little-endian header, then MSB-first packed payload):

    magic   4 bytes  "BWPC"
    version u8       1
    mode    u8       0 = leaf means, 1 = wavelet coefficients
    strat   u8       0 = md, 1 = fa, 2 = r
    metric  u8       0 = hop, 1 = wpath, 2 = l1, 3 = l2, 4 = linf
    n       u32      vertex count
    M       u32      center count
    K       u16      quantizer level count
    lo, hi  f64 x2   quantizer range
    q1      u32      first center
    payload          M-1 center indices at ceil(log2 n) bits each,
                     then M value codes at ceil(log2 K) bits each,
                     zero-padded to a byte boundary.

The payload therefore occupies (M-1)*ceil(log2 n) + M*ceil(log2 K) bits
exactly; when n and K are powers of two this stays within the
ceil(log2 n + log2 K) * M bit budget of the storage bound.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .errors import FormatError, InvariantError
from .graph import Graph
from .metrics import Metric
from .tree import BwpTree, tree_from_centers

__all__ = [
    "MAGIC",
    "VERSION",
    "MODE_TAGS",
    "STRATEGY_TAGS",
    "METRIC_TAGS",
    "QuantizerParams",
    "quantize",
    "dequantize",
    "StreamHeader",
    "DecodedStream",
    "serialize",
    "deserialize",
    "peek_header",
    "ceil_log2",
    "payload_bits",
    "bits_per_node",
]

MAGIC = b"BWPC"
VERSION = 1
_HEADER_FMT = "<4sBBBBIIHddI"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)

MODE_TAGS = {"means": 0, "wavelets": 1}
STRATEGY_TAGS = {"md": 0, "fa": 1, "r": 2}
METRIC_TAGS = {"hop": 0, "wpath": 1, "l1": 2, "l2": 3, "linf": 4}
_MODE_NAMES = {v: k for k, v in MODE_TAGS.items()}
_STRATEGY_NAMES = {v: k for k, v in STRATEGY_TAGS.items()}
_METRIC_NAMES = {v: k for k, v in METRIC_TAGS.items()}


def ceil_log2(x: int) -> int:
    if x < 1:
        raise ValueError(f"need x >= 1, got {x}")
    return (x - 1).bit_length()


# ----------------------------------------------------------------------
# Uniform quantizer
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class QuantizerParams:
    K: int
    lo: float
    hi: float


def quantize(values: np.ndarray, K: int) -> tuple[np.ndarray, QuantizerParams]:
    """Uniform quantizer over the observed [min, max] range.

    Every dequantized value is within (hi - lo) / (2 (K - 1)) of its
    input; constant inputs are coded losslessly as all zeros.
    """
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return np.zeros(len(values), dtype=np.int64), QuantizerParams(K, lo, hi)
    codes = np.rint((values - lo) / (hi - lo) * (K - 1)).astype(np.int64)
    return np.clip(codes, 0, K - 1), QuantizerParams(K, lo, hi)


def dequantize(codes: np.ndarray, params: QuantizerParams) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    if params.lo == params.hi:
        return np.full(len(codes), params.lo, dtype=np.float64)
    step = (params.hi - params.lo) / (params.K - 1)
    return params.lo + codes * step


# ----------------------------------------------------------------------
# MSB-first bit packing
# ----------------------------------------------------------------------


class _BitWriter:
    def __init__(self) -> None:
        self.out = bytearray()
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, width: int) -> None:
        if width == 0:
            if value != 0:
                raise InvariantError(f"value {value} does not fit in 0 bits")
            return
        if value < 0 or value >> width:
            raise InvariantError(f"value {value} does not fit in {width} bits")
        self._acc = (self._acc << width) | value
        self._nbits += width
        while self._nbits >= 8:
            self._nbits -= 8
            self.out.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def getvalue(self) -> bytes:
        if self._nbits:
            self.out.append((self._acc << (8 - self._nbits)) & 0xFF)
            self._acc, self._nbits = 0, 0
        return bytes(self.out)


class _BitReader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0  # bit position

    def read(self, width: int) -> int:
        if width == 0:
            return 0
        end = self.pos + width
        if end > 8 * len(self.data):
            raise FormatError("truncated payload")
        value = 0
        pos = self.pos
        while pos < end:
            byte = self.data[pos >> 3]
            offset = pos & 7
            take = min(8 - offset, end - pos)
            chunk = (byte >> (8 - offset - take)) & ((1 << take) - 1)
            value = (value << take) | chunk
            pos += take
        self.pos = end
        return value


# ----------------------------------------------------------------------
# Stream encode / decode
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class StreamHeader:
    mode: str
    strategy: str
    metric: str
    n: int
    M: int
    K: int
    lo: float
    hi: float
    q1: int


@dataclass
class DecodedStream:
    header: StreamHeader
    tree: BwpTree
    values: np.ndarray  # dequantized leaf means or wavelet coefficients
    codes: np.ndarray


def payload_bits(n: int, M: int, K: int) -> int:
    """Exact payload size of the layout, in bits (before byte padding)."""
    return (M - 1) * ceil_log2(n) + M * ceil_log2(K)


def peek_header(data: bytes) -> StreamHeader:
    """Parse and validate only the fixed-size header of a stream."""
    if len(data) < _HEADER_SIZE:
        raise FormatError("stream shorter than the fixed header")
    magic, version, mode_tag, strat_tag, metric_tag, n, M, K, lo, hi, q1 = struct.unpack(
        _HEADER_FMT, data[:_HEADER_SIZE]
    )
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if (
        mode_tag not in _MODE_NAMES
        or strat_tag not in _STRATEGY_NAMES
        or metric_tag not in _METRIC_NAMES
    ):
        raise FormatError("unknown header tags")
    return StreamHeader(
        mode=_MODE_NAMES[mode_tag],
        strategy=_STRATEGY_NAMES[strat_tag],
        metric=_METRIC_NAMES[metric_tag],
        n=n,
        M=M,
        K=K,
        lo=lo,
        hi=hi,
        q1=int(q1),
    )


def bits_per_node(n: int, M: int, K: int) -> float:
    """Storage-bound accounting: ceil(log2 n + log2 K) * M / n."""
    if n < 1 or M < 1 or K < 1:
        raise ValueError("need n, M, K >= 1")
    return ceil(log2(n) + log2(K)) * M / n


def serialize(
    tree: BwpTree, values: np.ndarray, mode: str, K: int, strategy_kind: str
) -> bytes:
    """Quantize ``values`` and pack (centers, codes) into a byte stream."""
    if mode not in MODE_TAGS:
        raise ValueError(f"unknown mode {mode!r}")
    if strategy_kind not in STRATEGY_TAGS:
        raise ValueError(f"unknown strategy {strategy_kind!r}")
    n, M = tree.graph.n, tree.M
    values = np.asarray(values, dtype=np.float64)
    if len(values) != M:
        raise ValueError(f"expected {M} values, got {len(values)}")
    if not 2 <= K <= 0xFFFF:
        raise ValueError(f"K must be in [2, 65535], got {K}")
    codes, params = quantize(values, K)

    header = struct.pack(
        _HEADER_FMT,
        MAGIC,
        VERSION,
        MODE_TAGS[mode],
        STRATEGY_TAGS[strategy_kind],
        METRIC_TAGS[tree.metric.kind],
        n,
        M,
        K,
        params.lo,
        params.hi,
        tree.centers[0],
    )
    cbits, vbits = ceil_log2(n), ceil_log2(K)
    writer = _BitWriter()
    for q in tree.centers[1:]:
        writer.write(int(q), cbits)
    for c in codes:
        writer.write(int(c), vbits)
    payload = writer.getvalue()

    nbits = payload_bits(n, M, K)
    if len(payload) != (nbits + 7) // 8:
        raise InvariantError("payload size does not match the layout formula")
    if n & (n - 1) == 0 and K & (K - 1) == 0 and nbits > ceil(log2(n) + log2(K)) * M:
        raise InvariantError("payload exceeds the storage bound")
    return header + payload


def deserialize(
    data: bytes, graph: Graph, metric: Metric | None = None
) -> DecodedStream:
    """Parse and validate a stream, rebuilding the tree from its centers.

    If ``metric`` is omitted, one matching the header's metric tag is
    constructed on ``graph`` (with global subset distances); a provided
    metric must agree with the tag or the rebuilt tree would not match
    the encoder's.
    """
    header = peek_header(data)
    n, M, K, lo, hi, q1 = header.n, header.M, header.K, header.lo, header.hi, header.q1
    if n != graph.n:
        raise FormatError(f"stream was encoded for n={n}, graph has n={graph.n}")
    if not (1 <= M <= n):
        raise FormatError(f"center count M={M} out of range for n={n}")
    if K < 2:
        raise FormatError(f"invalid quantizer level count K={K}")
    if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
        raise FormatError(f"invalid quantizer range [{lo}, {hi}]")
    if q1 >= n:
        raise FormatError(f"first center {q1} out of range")

    expected = _HEADER_SIZE + (payload_bits(n, M, K) + 7) // 8
    if len(data) < expected:
        raise FormatError("truncated payload")
    if len(data) > expected:
        raise FormatError("trailing bytes after payload")

    cbits, vbits = ceil_log2(n), ceil_log2(K)
    reader = _BitReader(data[_HEADER_SIZE:])
    centers = [int(q1)]
    for _ in range(M - 1):
        q = reader.read(cbits)
        if q >= n:
            raise FormatError(f"center index {q} out of range")
        centers.append(q)
    codes = np.array([reader.read(vbits) for _ in range(M)], dtype=np.int64)
    if np.any(codes >= K):
        raise FormatError("value code out of range")

    if metric is None:
        metric = Metric(graph, header.metric)
    elif metric.kind != header.metric:
        raise InvariantError(
            f"stream used metric {header.metric!r}, caller provided {metric.kind!r}"
        )
    tree = tree_from_centers(graph, metric, centers)
    values = dequantize(codes, QuantizerParams(K, lo, hi))
    return DecodedStream(header=header, tree=tree, values=values, codes=codes)
