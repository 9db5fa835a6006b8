"""Adaptive compression of graph signals and images with binary wedge
partitioning trees and geometric Haar-type wavelets."""

from .codec import (
    bits_per_node,
    dequantize,
    deserialize,
    payload_bits,
    quantize,
    serialize,
)
from .encoder import EncodeResult, EncoderState, Strategy, encode, error_curve, split_cost
from .errors import FormatError, InvariantError
from .graph import (
    Graph,
    gen_er_graph,
    gen_grid_graph,
    load_graph,
    load_signal,
    save_graph,
    save_signal,
)
from .imaging import (
    GrayImage,
    haar2d_topm,
    image_to_signal,
    psnr,
    quadtree_encode,
    read_image,
    read_pgm,
    render_details,
    render_partition,
    signal_to_image,
    write_pgm,
)
from .metrics import Metric, wedge_assign
from .theory import besov_oracle, jackson_check
from .tree import BwpTree, PartitionLevel, tree_from_centers
from .wavelets import (
    WaveletDecomposition,
    decompose,
    decomposition_from_values,
    m_term_error,
    mr_functional,
    r_energy,
    reconstruct_from_means,
    reconstruct_from_wavelet_values,
    stored_wavelet_values,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "FormatError",
    "InvariantError",
    "Graph",
    "load_graph",
    "save_graph",
    "load_signal",
    "save_signal",
    "gen_er_graph",
    "gen_grid_graph",
    "Metric",
    "wedge_assign",
    "BwpTree",
    "PartitionLevel",
    "tree_from_centers",
    "Strategy",
    "EncoderState",
    "EncodeResult",
    "encode",
    "error_curve",
    "split_cost",
    "WaveletDecomposition",
    "decompose",
    "reconstruct_from_means",
    "stored_wavelet_values",
    "decomposition_from_values",
    "reconstruct_from_wavelet_values",
    "m_term_error",
    "r_energy",
    "mr_functional",
    "jackson_check",
    "besov_oracle",
    "quantize",
    "dequantize",
    "serialize",
    "deserialize",
    "payload_bits",
    "bits_per_node",
    "GrayImage",
    "read_pgm",
    "write_pgm",
    "read_image",
    "image_to_signal",
    "signal_to_image",
    "psnr",
    "quadtree_encode",
    "haar2d_topm",
    "render_partition",
    "render_details",
]
